"""
Scoring produced answers against reference texts
================================================

Each answer is embedded next to its reference, scored by cosine, and
the per-document scores are aggregated with a mean and sample standard
deviation, reported at three half-up-rounded decimals.
"""

import tempfile
from pathlib import Path

from qimrag import EvalRow, aggregate, round_half_up, score_pair, write_report

produced = {
    "1": "Youth Spirit Artworks is a jobs and job training program "
         "using art to empower young people.",
    "2": "The board of directors includes community leaders who "
         "oversee programs and budgets.",
    "3": "An unrelated sentence about sailing schedules and weather.",
}
references = {
    "1": "Youth Spirit Artworks is an interfaith art jobs and job "
         "training program empowering youth.",
    "2": "A volunteer board of directors of community leaders governs "
         "the organization, its budget, and its programs.",
    "3": "Homeless youth are defined as young people lacking fixed, "
         "regular, adequate nighttime residence.",
}

rows = [EvalRow(doc_id, score_pair(produced[doc_id], references[doc_id]))
        for doc_id in sorted(produced)]
for row in rows:
    print(f"doc {row.doc_id}: score {row.score:+.4f}")

summary = aggregate(rows)
print(f"\nave {round_half_up(summary.ave, 3)}   "
      f"sd {round_half_up(summary.sd, 3)}")

report = Path(tempfile.mkdtemp()) / "report.csv"
write_report(summary, report)
print(f"\nreport at {report}:")
print("\n".join("  " + line for line in report.read_text().splitlines()))
