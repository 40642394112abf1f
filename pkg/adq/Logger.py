from datetime import datetime
import time
from typing import Optional


class Logger:
    def __init__(self, echo: bool = True):
        self.start_time = datetime.now()
        self.stats = {
            "start_time": self.start_time,
            "stage_times": {},
            "warnings": [],
        }
        self.current_stage = None
        self.stage_start_time = None
        self.echo = echo

    def _print(self, message: str):
        if self.echo:
            print(message)

    def start_stage(self, stage_name: str):
        """Start timing a stage"""
        if self.current_stage:
            self.end_stage()

        self.current_stage = stage_name
        self.stage_start_time = time.time()
        self._print(f"Starting {stage_name}...")

    def end_stage(self):
        """End timing the current stage"""
        if self.current_stage and self.stage_start_time:
            duration = time.time() - self.stage_start_time
            self.stats["stage_times"][self.current_stage] = duration
            self._print(
                f"{self.current_stage} completed in {self._format_duration(duration)}"
            )

        self.current_stage = None
        self.stage_start_time = None

    def log_warning(self, message: str):
        self.stats["warnings"].append(message)
        self._print(f"WARNING: {message}")

    def log_iteration(self, iteration: int, objective: float, residual: float, step: float):
        self._print(
            f"  iter {iteration:>5}  objective={objective:.10g}  residual={residual:.3e}  step={step:.3e}"
        )

    def log_admissibility(self, name: str, passed: bool, detail: str = ""):
        mark = "pass" if passed else "FAIL"
        self._print(f"{name}: {mark} {detail}".rstrip())

    def log_solve_result(self, report):
        """Log solver completion"""
        status = "converged" if report.converged else "NOT converged"
        self._print(f"Solve {status} after {report.iterations} iterations")
        self._print(f"- Lagrange residual: {report.lagrange_residual:.3e}")
        self._print(f"- Measure residual:  {report.measure_residual:.3e}")
        self._print(f"- Psi value:         {report.psi_value:.10g}")
        self._print(f"- Seed: {report.seed}  Budgets: {report.budgets.model_dump()}")
        for flag in report.flags:
            self._print(f"  flag: {flag}")

    def log_table(self, header: list[str], rows: list[list[float]]):
        self._print("  ".join(f"{h:>16}" for h in header))
        for row in rows:
            self._print("  ".join(f"{v:>16.10g}" for v in row))

    def log_value(self, name: str, value: float, extra: Optional[str] = None):
        line = f"{name} = {value:.10g}"
        if extra:
            line += f"  ({extra})"
        self._print(line)

    def log_check(self, check):
        mark = "✓" if check.passed else "✗"
        self._print(f"  {mark} {check.name:<40} {check.detail}")

    def log_file_written(self, kind: str, path: str):
        self._print(f"{kind} written to {path}")

    def print_final_stats(self):
        """Print final timing statistics"""
        self.end_stage()

        end_time = datetime.now()
        self.stats["end_time"] = end_time
        self.stats["total_duration"] = (end_time - self.start_time).total_seconds()

        self._print("\n" + "=" * 60)
        self._print("RUN STATS")
        self._print("=" * 60)

        total_time = self.stats["total_duration"]
        self._print(f"Total time: {self._format_duration(total_time)}")
        self._print(f"Started:    {self.stats['start_time'].strftime('%H:%M:%S')}")
        self._print(f"Completed:  {self.stats['end_time'].strftime('%H:%M:%S')}")

        if self.stats["stage_times"]:
            self._print("\nStage breakdown:")
            self._print("-" * 40)
            for stage_name, duration in self.stats["stage_times"].items():
                percentage = (duration / total_time) * 100 if total_time > 0 else 0.0
                self._print(
                    f"  {stage_name:<24} {self._format_duration(duration):<10} ({percentage:.1f}%)"
                )

        if self.stats["warnings"]:
            self._print(f"\nWarnings: {len(self.stats['warnings'])}")

        self._print("=" * 60)

    def _format_duration(self, seconds: float) -> str:
        """Format duration in seconds to human readable format"""
        if seconds < 60:
            return f"{seconds:.1f}s"
        elif seconds < 3600:
            minutes = int(seconds // 60)
            remaining_seconds = seconds % 60
            return f"{minutes}m {remaining_seconds:.1f}s"
        else:
            hours = int(seconds // 3600)
            minutes = int((seconds % 3600) // 60)
            remaining_seconds = seconds % 60
            return f"{hours}h {minutes}m {remaining_seconds:.1f}s"
