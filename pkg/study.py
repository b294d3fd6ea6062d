"""
Illumination study
Orchestrator that evaluates a suite of probe states concurrently, checks the
HB/Holevo ranking and writes the resulting table.
"""
import asyncio
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional

from analysis.metrics import StateMetrics, evaluate_state, ranking_check
from config import config
from core.errors import NumericError
from core.presets import ProbeConfig, load_presets
from utils.export import TABLE_COLUMNS, timestamp, write_rows


@dataclass
class StudyReport:
    generated_at: str
    suite: str
    tolerance: float
    log_base: float
    run_config: dict
    rows: List[dict]
    ranking: dict
    failures: List[str]
    config_warnings: List[str]

    def metadata(self) -> dict:
        return {
            "generated_at": self.generated_at,
            "suite": self.suite,
            "tolerance": self.tolerance,
            "log_base": self.log_base,
            "run_config": self.run_config,
        }


class IlluminationStudy:
    """Runs the mean-value pipeline for one suite of probe states"""

    def __init__(self, tol: float = None, log_base: float = None, threads: int = None,
                 with_holevo: bool = True, run_config: dict = None, presets_path: str = None):
        self.tol = config.tolerance if tol is None else tol
        self.log_base = config.log_base if log_base is None else log_base
        self.threads = config.threads if threads is None else threads
        self.with_holevo = with_holevo
        self.run_config = run_config or {}
        self.presets = load_presets(presets_path)

        self.last_report: Optional[StudyReport] = None

    async def run(self, suite_ref: str) -> StudyReport:
        """Evaluate every state of the suite"""
        suite, entries = self.presets.suite(suite_ref)

        print(f"\n{'='*60}")
        print("Quantum Illumination Study")
        print(f"Suite {suite_ref}: {len(entries)} probe states, tolerance {self.tol:g}")
        print(f"{'='*60}\n")

        warnings = config.validate()
        if warnings:
            print("Configuration warnings:")
            for w in warnings:
                print(f"  ⚠️  {w}")
            print()

        # states × per-state workers never exceeds the thread budget
        per_state = max(1, self.threads // max(1, len(entries)))
        slots = asyncio.Semaphore(max(1, self.threads // per_state))
        print("🧮 Integrating over (p0, η)...")
        results = await asyncio.gather(*(self._evaluate(entry, slots, per_state) for entry in entries))

        rows = [r for r in results if r is not None]
        failures = [f"{e.configuration} {e.label}" for e, r in zip(entries, results) if r is None]
        ranking = {
            configuration: ranking_check([r for r in rows if r.configuration == configuration]).to_dict()
            for configuration in dict.fromkeys(r.configuration for r in rows)
        }

        print(f"\n✅ Evaluated {len(rows)} of {len(entries)} states")
        if failures:
            print(f"   ❌ Failed: {', '.join(failures)}")

        self.last_report = StudyReport(
            generated_at=timestamp(),
            suite=suite_ref,
            tolerance=self.tol,
            log_base=self.log_base,
            run_config=self.run_config,
            rows=[self._row(r, e) for r, e in zip(results, entries) if r is not None],
            ranking=ranking,
            failures=failures,
            config_warnings=warnings,
        )
        return self.last_report

    async def _evaluate(self, entry: ProbeConfig, slots: asyncio.Semaphore, threads: int) -> Optional[StateMetrics]:
        """Evaluate one state off the event loop, reporting numeric failures"""
        async with slots:
            try:
                return await asyncio.to_thread(
                    evaluate_state, entry, self.tol, self.log_base, self.with_holevo, threads
                )
            except NumericError as e:
                print(f"Error evaluating {entry.configuration} {entry.label}: {e}")
                return None

    @staticmethod
    def _row(result: StateMetrics, entry: ProbeConfig) -> dict:
        row = asdict(result)
        row["state"] = row.pop("label")
        if entry.reference is not None:
            row["reference_hb"] = entry.reference.mean_hb
            row["reference_holevo"] = entry.reference.mean_holevo
        return row

    def save_report(self, filepath: str = None, fmt: str = "csv") -> Optional[Path]:
        """Save the last report's table to a file"""
        if not self.last_report:
            print("No report to save. Run the study first.")
            return None
        if filepath is None:
            slug = self.last_report.suite.replace("/", "_")
            filepath = Path(config.output_dir) / f"{slug}.{fmt}"
        metadata = dict(self.last_report.metadata(), ranking=self.last_report.ranking, failures=self.last_report.failures)
        columns = TABLE_COLUMNS + ["commutator_norm", "holevo_skipped", "reference_hb", "reference_holevo"]
        path = write_rows(filepath, self.last_report.rows, metadata, fmt, columns)
        print(f"Report saved to {path}")
        return path

    def print_report(self):
        """Print a formatted report to console"""
        if not self.last_report:
            print("No report available. Run the study first.")
            return

        report = self.last_report
        print(f"\n{'='*60}")
        print(f"MEAN HELSTROM BOUND / HOLEVO TABLE: {report.suite}")
        print(f"Generated: {report.generated_at}")
        print(f"Tolerance: {report.tolerance:g} | Log base: {report.log_base:g}")
        print(f"{'='*60}\n")

        configuration = None
        for row in report.rows:
            if row["configuration"] != configuration:
                configuration = row["configuration"]
                print(f"\n📊 {configuration}")
                print("-" * 40)
            chi = "-" if row["mean_holevo"] is None else f"{row['mean_holevo']:.6f}"
            line = f"  {row['state']:<10} HB {row['mean_hb']:.6f}  χ {chi}  (± {row['err_estimate']:.1e})"
            if row.get("reference_hb") is not None:
                line += f"  Δref {row['mean_hb'] - row['reference_hb']:+.1e}"
            if row["holevo_skipped"]:
                line += "  [non-commuting]"
            print(line)

        inversions = [(c, pair) for c, r in report.ranking.items() for pair in r["inversions"]]
        print(f"\n🔀 HB/Holevo inversions: {len(inversions)}")
        for configuration, (lower, upper) in inversions:
            print(f"   • {configuration}: {lower} has lower HB than {upper} but also lower Holevo information")

        print(f"\n{'='*60}")
        print("END OF REPORT")
        print(f"{'='*60}\n")


async def main():
    """Main entry point"""
    study = IlluminationStudy()
    await study.run("three-qubit")
    study.print_report()
    study.save_report()


if __name__ == "__main__":
    asyncio.run(main())
