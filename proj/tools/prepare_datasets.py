#!/usr/bin/env python3
# Copyright 2026 The coevo Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds data/adult.csv and data/compas.csv from the public raw files.

The raw files ship inside the `responsibly` wheel (UCI Adult and the
ProPublica COMPAS two-year file). Pass --raw-dir to use already extracted
copies, otherwise the wheel is fetched with pip.

HR (promotion prediction) has no redistributable copy; see data/README.md
for the recipe that produces data/hr.csv from the Kaggle download.
"""

import argparse
import csv
import datetime
import pathlib
import subprocess
import sys
import tempfile
import zipfile

ADULT_RAW = [
    "age", "workclass", "fnlwgt", "education", "education_num", "marital_status", "occupation",
    "relationship", "race", "sex", "capital_gain", "capital_loss", "hours_per_week", "native_country",
    "income",
]
ADULT_KEEP = [
    "age", "workclass", "education", "marital_status", "occupation", "race", "sex", "capital_gain",
    "hours_per_week", "income",
]
COMPAS_KEEP = [
    "sex", "age", "race", "juv_fel_count", "juv_misd_count", "juv_other_count", "priors_count",
    "c_charge_degree", "c_jail_days", "two_year_recid",
]

WHEEL = "responsibly==0.1.2"
MEMBERS = {
    "adult.data": "responsibly/dataset/adult/adult.data",
    "adult.test": "responsibly/dataset/adult/adult.test",
    "compas.csv": "responsibly/dataset/compas/compas-scores-two-years.csv",
}


def fetch_raw(target: pathlib.Path) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "--only-binary", ":all:",
                        "-d", tmp, WHEEL], check=True)
        wheel = next(pathlib.Path(tmp).glob("*.whl"))
        with zipfile.ZipFile(wheel) as zf:
            for name, member in MEMBERS.items():
                (target / name).write_bytes(zf.read(member))


def adult_rows(raw: pathlib.Path):
    for name in ("adult.data", "adult.test"):
        with open(raw / name, newline="") as f:
            for row in csv.reader(f, skipinitialspace=True):
                if len(row) != len(ADULT_RAW):
                    continue  # blank lines and the test file's banner
                rec = dict(zip(ADULT_RAW, (v.strip() for v in row)))
                rec["income"] = rec["income"].rstrip(".")
                yield [rec[c] for c in ADULT_KEEP]


def jail_days(jail_in: str, jail_out: str) -> str:
    if not jail_in or not jail_out:
        return ""
    fmt = "%Y-%m-%d %H:%M:%S"
    delta = datetime.datetime.strptime(jail_out, fmt) - datetime.datetime.strptime(jail_in, fmt)
    return str(delta.days)


def compas_rows(raw: pathlib.Path):
    with open(raw / "compas.csv", newline="") as f:
        for rec in csv.DictReader(f):
            rec["c_jail_days"] = jail_days(rec["c_jail_in"], rec["c_jail_out"])
            yield [rec[c] for c in COMPAS_KEEP]


def write(path: pathlib.Path, header, rows) -> int:
    n = 0
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)
            n += 1
    return n


def main() -> int:
    here = pathlib.Path(__file__).resolve().parent.parent
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--raw-dir", type=pathlib.Path, help="directory with adult.data, adult.test, compas.csv")
    ap.add_argument("--out", type=pathlib.Path, default=here / "data")
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        raw = args.raw_dir
        if raw is None:
            raw = pathlib.Path(tmp)
            fetch_raw(raw)
        n = write(args.out / "adult.csv", ADULT_KEEP, adult_rows(raw))
        print(f"adult.csv: {n} rows")
        n = write(args.out / "compas.csv", COMPAS_KEEP, compas_rows(raw))
        print(f"compas.csv: {n} rows")
    return 0


if __name__ == "__main__":
    sys.exit(main())
