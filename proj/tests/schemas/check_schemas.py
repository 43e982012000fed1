"""Run the command-line tool against the fixtures and validate every JSON
document it prints against docs/schemas.

usage: check_schemas.py <gamtalk binary> <source dir>
"""
import json
import pathlib
import subprocess
import sys
import tempfile

try:
    import jsonschema
    from referencing import Registry, Resource
except ImportError as exc:  # pragma: no cover
    print(f"skipping: {exc}")
    sys.exit(77)

DESCRIPTION = ("This model represents outcomes of hospitalized patients with pneumonia. "
               "The outcome is in-hospital mortality.")
DIRECTION = "Positive scores mean a higher risk of death."


def main(binary, source):
    source = pathlib.Path(source)
    fixtures = source / "tests" / "fixtures"
    schemas = {}
    for path in sorted((source / "docs" / "schemas").glob("*.schema.json")):
        schemas[path.name] = json.loads(path.read_text())
    registry = Registry().with_resources(
        (name, Resource.from_contents(doc)) for name, doc in schemas.items())

    failures = []

    def check(label, args, schema, stdin=None, expect_code=0, stream="stdout"):
        proc = subprocess.run([binary, *args], input=stdin, capture_output=True, text=True, timeout=120)
        text = proc.stdout if stream == "stdout" else proc.stderr
        if proc.returncode != expect_code:
            failures.append(f"{label}: exit {proc.returncode}, expected {expect_code}: {proc.stderr[:300]}")
            return
        try:
            doc = json.loads(text)
            validator = jsonschema.Draft202012Validator(schemas[schema], registry=registry)
            validator.validate(doc)
        except (ValueError, jsonschema.ValidationError) as exc:
            failures.append(f"{label}: {exc}")
            return
        print(f"ok   {label}")

    age = str(fixtures / "age_model.json")
    pneumonia = str(fixtures / "pneumonia_model.json")
    long_model = str(fixtures / "long_model.json")
    mock = str(fixtures / "pneumonia_mock.json")
    context = ["--description", DESCRIPTION, "--outcome-direction", DIRECTION]

    check("simplify", ["simplify", "--model", long_model, "-f", "long_feature", "--budget", "2000"],
          "simplify.schema.json")
    check("verify", ["verify", "--model", age, "-f", "age", "--at", "82", "--from", "80", "--to", "82",
                     "--step", "5"], "verify.schema.json")
    check("describe", ["describe", "--model", pneumonia, "-f", "age", "--mock", mock, *context],
          "graph_summary.schema.json")
    check("summarize", ["summarize", "--model", pneumonia, "--mock", mock, *context], "model_summary.schema.json")
    check("surprises", ["surprises", "--model", pneumonia, "--mock", mock, *context], "surprises.schema.json")
    check("negative control", ["surprises", "--negative-control", "--mock", mock, *context],
          "negative_control.schema.json")
    check("hash-messages", ["hash-messages"], "hash.schema.json",
          stdin='[{"role": "system", "content": "s"}, {"role": "user", "content": "hi"}]')

    with tempfile.TemporaryDirectory() as tmp:
        csv = pathlib.Path(tmp) / "data.csv"
        rows = ["x,group,y"] + [f"{i},{'ab'[i % 2]},{int(i > 60)}" for i in range(120)]
        csv.write_text("\n".join(rows) + "\n")
        check("train", ["train", "--data", str(csv), "--label-column", "y", "--bags", "2", "--max-rounds", "30"],
              "train.schema.json")
        check("train --test", ["train", "--data", str(csv), "--label-column", "y", "--bags", "2",
                               "--max-rounds", "30", "--test", str(csv), "-o", str(pathlib.Path(tmp) / "m.json")],
              "train.schema.json")
        empty = pathlib.Path(tmp) / "empty.csv"
        empty.write_text("x,y\n")
        check("train error", ["train", "--data", str(empty), "--label-column", "y"], "error.schema.json",
              expect_code=1, stream="stderr")

    check("out-of-domain error", ["verify", "--model", age, "-f", "age", "--at", "500"], "error.schema.json",
          expect_code=1, stream="stderr")
    check("usage error", ["frobnicate"], "error.schema.json", expect_code=64, stream="stderr")

    for f in failures:
        print(f"FAIL {f}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
