"""
Log Auditor
===========
Configures logging and writes run artefacts: Betti tables, range reports,
witnesses and verification record streams, as JSON or CSV.

Artefact payloads carry no timestamps, so identical runs write identical
files. The session audit file under logs/ records when each run happened.
"""

import json
import sys
from datetime import datetime
from pathlib import Path

import pandas as pd
from loguru import logger

from config import LOG_DIR, REPORT_DIR

# Configure Loguru
logger.remove()
logger.add(sys.stderr, format="<green>{time:HH:mm:ss}</green> | <level>{message}</level>", level="INFO")
logger.add(LOG_DIR / "system.log", rotation="10 MB", retention="10 days", level="DEBUG")

FORMATS = ("json", "csv")


class LogAuditor:
    def __init__(self, report_dir: Path = REPORT_DIR):
        self.log_dir = LOG_DIR
        self.report_dir = Path(report_dir)
        self.session_id = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.audit_file = self.log_dir / f"audit_{self.session_id}.json"

    # --- writers ---------------------------------------------------
    def write_json(self, payload, path: Path) -> bool:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w") as f:
                json.dump(payload, f, indent=2, sort_keys=True)
                f.write("\n")
            logger.success(f"Wrote {path}")
            return True
        except Exception as e:
            logger.error(f"Failed to write {path}: {e}")
            return False

    def write_csv(self, rows: list[dict], path: Path, columns: list[str] | None = None) -> bool:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            pd.DataFrame(rows, columns=columns).to_csv(path, index=False)
            logger.success(f"Wrote {path} ({len(rows)} rows)")
            return True
        except Exception as e:
            logger.error(f"Failed to write {path}: {e}")
            return False

    def _write(self, payload, rows: list[dict], path: Path, fmt: str, columns: list[str] | None = None) -> bool:
        if fmt == "csv":
            return self.write_csv(rows, path, columns)
        return self.write_json(payload, path)

    # --- artefacts -------------------------------------------------
    def write_betti(self, table, path: Path, fmt: str = "json") -> bool:
        return self._write(table.to_dict(), table.to_frame().to_dict("records"), path, fmt, ["p", "q", "dim"])

    def write_range(self, reports: list, path: Path, fmt: str = "json") -> bool:
        payload = [r.to_dict() for r in reports]
        rows = [{k: v for k, v in r.items() if k not in ("perK", "setting")} for r in payload]
        return self._write(payload, rows, path, fmt)

    def write_witness(self, witness, path: Path, fmt: str = "json") -> bool:
        payload = witness.to_dict()
        payload["setting"] = witness.setting.as_dict()
        payload["route"] = witness.route
        row = {**{k: v for k, v in payload.items() if k not in ("flags", "factors", "setting")},
               "factors": " ".join(payload["factors"]), **payload["flags"]}
        return self._write(payload, [row], path, fmt)

    def write_records(self, records: list, path: Path, fmt: str = "json") -> bool:
        rows = [r.to_dict() for r in records]
        return self._write(rows, rows, path, fmt, ["instance", "claim", "status", "details", "conjectural"])

    # --- session trail ---------------------------------------------
    def write_session_log(self, command: str, config: dict, outcome: dict):
        """Writes logs/audit_<session>.json with the run config and outcome."""
        logger.info(f"Auditing run to {self.audit_file}...")
        report = {
            "timestamp": datetime.now().isoformat(),
            "session_id": self.session_id,
            "command": command,
            "config": config,
            "outcome": outcome,
        }
        try:
            with open(self.audit_file, "w") as f:
                json.dump(report, f, indent=2, default=str)
            logger.success(f"Audit log written: {outcome}")
        except Exception as e:
            logger.error(f"Failed to write audit log: {e}")
