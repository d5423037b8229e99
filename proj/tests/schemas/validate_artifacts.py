"""Runs each edeg command on small inputs and validates the JSON artifacts
against the shipped schemas. CSV outputs are checked for RFC 4180 shape."""

import argparse
import csv
import json
import pathlib
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource


def load_registry(schema_dir):
    resources = []
    schemas = {}
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        schemas[path.name] = doc
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return schemas, Registry().with_resources(resources)


def check_csv(path):
    raw = path.read_bytes()
    assert raw.endswith(b"\r\n"), f"{path}: records must end with CRLF"
    assert b"\n" not in raw.replace(b"\r\n", b""), f"{path}: bare LF"
    with path.open(newline="") as f:
        rows = list(csv.reader(f, strict=True))
    width = len(rows[0])
    assert all(len(r) == width for r in rows), f"{path}: ragged rows"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--edeg", required=True)
    ap.add_argument("--schemas", required=True, type=pathlib.Path)
    ap.add_argument("--data", required=True, type=pathlib.Path)
    ap.add_argument("--workdir", required=True, type=pathlib.Path)
    args = ap.parse_args()

    schemas, registry = load_registry(args.schemas)
    data = args.data
    runs = {
        "estimate": ["estimate", "--config", str(data / "configs/estimate_product.json"),
                     "--set", f'dataset="{data / "gaussian3d.csv"}"', "--set", "pca=true", "--set", "n_paths=32"],
        "train": ["train", "--set", f'dataset="{data / "two_moons.csv"}"', "--set", "steps=10",
                  "--set", "lambda=0.5", "--set", "anchored=true", "--set", "post_softmax=true",
                  "--set", "measure_paths=32"],
        "verify": ["verify-degree", "--p1", "x1^2*x2 + 1/3*x3", "--p2", "x2 - x3", "--set", "n=50"],
        "pnn": ["pnn-study", "--set", "tasks=[1,2,3,4,5,6]", "--set", "steps=1",
                "--set", "eval_paths=8", "--set", "mse_threshold=1e12"],
        "gradcheck": ["gradcheck", "--set", "instances=8", "--set", "composite_instances=2"],
    }
    expected = {
        "estimate": {"report.json": "estimate_report.schema.json"},
        "train": {"train_summary.json": "train_summary.schema.json", "checkpoint.json": "checkpoint.schema.json"},
        "verify": {"verify.json": "verify.schema.json"},
        "pnn": {"pnn_study.json": "pnn_study.schema.json"},
        "gradcheck": {"gradcheck.json": "gradcheck.schema.json"},
    }
    failures = 0
    for name, argv in runs.items():
        out = args.workdir / name
        proc = subprocess.run([args.edeg, *argv, "--out", str(out)], capture_output=True, text=True)
        if proc.returncode not in (0, 1):
            print(f"FAIL {name}: exit {proc.returncode}\n{proc.stderr}")
            failures += 1
            continue
        for artifact, schema_name in expected[name].items():
            doc = json.loads((out / artifact).read_text())
            validator = jsonschema.Draft202012Validator(schemas[schema_name], registry=registry)
            errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
            if errors:
                failures += 1
                for e in errors[:5]:
                    print(f"FAIL {name}/{artifact}: {list(e.path)}: {e.message}")
            else:
                print(f"ok   {name}/{artifact}")
        for csv_path in sorted(out.glob("*.csv")):
            try:
                check_csv(csv_path)
                print(f"ok   {name}/{csv_path.name}")
            except AssertionError as e:
                failures += 1
                print(f"FAIL {e}")
    # The schemas must also reject broken documents.
    report = json.loads((args.workdir / "estimate" / "report.json").read_text())
    validator = jsonschema.Draft202012Validator(schemas["estimate_report.schema.json"], registry=registry)
    for mutate in (lambda d: d.pop("canonical_hash"), lambda d: d.update(mean_ed=-1.0),
                   lambda d: d["per_path"][0].update(extra=1), lambda d: d.update(version="dev")):
        doc = json.loads(json.dumps(report))
        mutate(doc)
        if validator.is_valid(doc):
            failures += 1
            print("FAIL schema accepted a corrupted report")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
