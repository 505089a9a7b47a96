"""
A desk-scale timing table
=========================

Three synthetic models of 2.9, 4.6 and 5.6 MB published 10 times each.
Processing grows with size; attaching does not, because only the short
masked pointer reaches the ledger.
"""
from deamarket.bench import run_bench
from deamarket.synth import synthetic_record

files = [(f"{s / 1e6:.1f}MB", synthetic_record(s, seed=i).to_bytes())
         for i, s in enumerate((2_900_000, 4_600_000, 5_600_000))]
report = run_bench(files, iterations=10, difficulty=8, milestone_interval=5, seed=0)
print(report.table())
report.write_jsonl("bench-report.jsonl")
print("raw records written to bench-report.jsonl")
