import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import config

logger = logging.getLogger(__name__)


@dataclass
class Certificate:
    name: str
    passed: bool
    witness: Any = None

    def to_dict(self) -> Dict:
        return {"name": self.name, "passed": self.passed, "witness": self.witness}


@dataclass
class Report:
    command: List[str]
    result: Any = None
    certificates: List[Certificate] = field(default_factory=list)
    exit_code: int = 0
    error: Optional[Dict] = None
    chart: Optional[str] = None

    def certify(self, name: str, passed: bool, witness: Any = None) -> bool:
        self.certificates.append(Certificate(name, passed, witness))
        return passed

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)

    def to_dict(self) -> Dict:
        return {
            "command": self.command,
            "result": self.result,
            "certificates": [c.to_dict() for c in self.certificates],
            "exit_code": self.exit_code,
            "error": self.error,
        }


class ReportService:
    def render(self, report: Report, fmt: str = config.DEFAULT_OUTPUT) -> str:
        if fmt == "ascii":
            return self.render_ascii(report)
        return json.dumps(report.to_dict(), sort_keys=True, ensure_ascii=False, indent=2) + "\n"

    def render_ascii(self, report: Report) -> str:
        lines = [f"$ {' '.join(report.command)}"]
        if report.error:
            lines.append(f"error: {report.error['message']}")
            if report.error.get("clause"):
                lines.append(f"clause: {report.error['clause']}")
        if report.chart:
            lines.append(report.chart)
        elif report.result is not None:
            lines.extend(self._ascii_lines(report.result, 0))
        for c in report.certificates:
            lines.append(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}")
        lines.append(f"exit {report.exit_code}")
        return "\n".join(lines) + "\n"

    def _ascii_lines(self, value: Any, depth: int) -> List[str]:
        pad = "  " * depth
        if isinstance(value, dict):
            lines = []
            for key in sorted(value):
                item = value[key]
                if isinstance(item, (dict, list)) and item:
                    lines.append(f"{pad}{key}:")
                    lines.extend(self._ascii_lines(item, depth + 1))
                else:
                    lines.append(f"{pad}{key}: {item}")
            return lines
        if isinstance(value, list):
            if all(not isinstance(x, (dict, list)) for x in value):
                return [f"{pad}{value}"]
            lines = []
            for item in value:
                lines.extend(self._ascii_lines(item, depth + 1) if isinstance(item, (dict, list))
                             else [f"{pad}- {item}"])
            return lines
        return [f"{pad}{value}"]
