#pragma once

// Hand-built graphs and models used across the suites. The age graph carries
// the interval scores printed in the pneumonia transcript; the rest of the
// pneumonia-style model is made up but shaped like the effects it describes.

#include <string>

#include "gamtalk/gam.hpp"
#include "gamtalk/llm/prompts.hpp"

namespace testsupport {

gamtalk::TermGraph age_graph();
gamtalk::TermGraph respiration_graph();

/// Ten terms: age first by importance, plus the six features whose graphs
/// the scripted surprise answer names.
gamtalk::GamModel pneumonia_model();

/// Single-term model around age_graph().
gamtalk::GamModel age_model();

/// Continuous graph with `bins` irregular bins, far over a 2000-token budget
/// at the default 600.
gamtalk::TermGraph long_graph(std::size_t bins = 600);

/// age_model() with its single term swapped for long_graph().
gamtalk::GamModel long_model();

gamtalk::llm::DatasetContext pneumonia_context();

std::string fixture_path(const std::string& name);

/// The six surprising features, as spelled in the model.
inline const char* const kSurpriseFeatures[] = {"heart_rate",       "systolic_blood_pressure", "albumin_level",
                                                "percentage_bands", "creatinine_level",        "sodium_level"};

} // namespace testsupport
