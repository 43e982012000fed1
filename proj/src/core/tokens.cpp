#include "gamtalk/tokens.hpp"

namespace gamtalk {

namespace {

enum class CharClass { letter, digit, space, punct };

CharClass classify(unsigned char c)
{
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80)
        return CharClass::letter;
    if (c >= '0' && c <= '9')
        return CharClass::digit;
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v')
        return CharClass::space;
    return CharClass::punct;
}

std::size_t ceil_div(std::size_t a, std::size_t b)
{
    return (a + b - 1) / b;
}

} // namespace

TokenEstimate estimate_tokens(std::string_view text)
{
    std::size_t tokens = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        const CharClass cls = classify(static_cast<unsigned char>(text[i]));
        if (cls == CharClass::punct) {
            ++tokens;
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < text.size() && classify(static_cast<unsigned char>(text[j])) == cls)
            ++j;
        const std::size_t len = j - i;
        if (cls == CharClass::letter)
            tokens += ceil_div(len, 4);
        else if (cls == CharClass::digit)
            tokens += ceil_div(len, 3);
        i = j;
    }
    return {tokens, std::string(kTokenEstimatorVersion)};
}

TokenCounter default_token_counter()
{
    return [](std::string_view text) { return estimate_tokens(text).tokens; };
}

} // namespace gamtalk
