"""
Run reports and ground-truth sidecars.

Both are line-oriented key=value text. A report starts with a header block
(tool, version, reference, config echo) followed by one [slave] section per
slave image, written in input order with a fixed field order.
"""
import os
from dataclasses import dataclass, field
from typing import Dict, List

from config import config_from_dict

TOOL_NAME = "exposure-align"
__version__ = "0.1.0"

SLAVE_SECTION = "[slave]"
SLAVE_FIELDS = [
    "path", "output", "theta_deg", "tx", "ty", "levels", "final_cost",
    "converged", "swapped", "mi_before", "mi_after",
]
TRUTH_FIELDS = ["slave", "theta_deg", "tx", "ty", "ev"]


@dataclass
class SlaveRecord:
    path: str
    output: str
    theta_deg: float
    tx: float
    ty: float
    levels: List[tuple] = field(default_factory=list)  # (level, iterations, cost, valid_fraction)
    final_cost: float = 0.0
    converged: bool = False
    swapped: bool = False
    mi_before: float = float("nan")
    mi_after: float = float("nan")

    @classmethod
    def from_result(cls, path, output, result, mi_before, mi_after):
        """Build a record from an AlignResult"""
        return cls(
            path=path,
            output=output,
            theta_deg=result.motion.degrees,
            tx=result.motion.tx,
            ty=result.motion.ty,
            levels=[(s.level, s.iterations, s.cost, s.valid_fraction) for s in result.per_level],
            final_cost=result.final_cost,
            converged=result.converged,
            swapped=result.swapped,
            mi_before=mi_before,
            mi_after=mi_after,
        )

    def to_dict(self):
        return {
            "path": self.path,
            "output": self.output,
            "theta_deg": repr(float(self.theta_deg)),
            "tx": repr(float(self.tx)),
            "ty": repr(float(self.ty)),
            "levels": ",".join(
                f"{int(lvl)}:{int(its)}:{float(cost)!r}:{float(frac)!r}" for lvl, its, cost, frac in self.levels
            ),
            "final_cost": repr(float(self.final_cost)),
            "converged": str(bool(self.converged)).lower(),
            "swapped": str(bool(self.swapped)).lower(),
            "mi_before": repr(float(self.mi_before)),
            "mi_after": repr(float(self.mi_after)),
        }


@dataclass
class RunReport:
    reference: str
    config: Dict[str, object]
    records: List[SlaveRecord] = field(default_factory=list)
    tool: str = TOOL_NAME
    version: str = __version__

    def align_config(self):
        """AlignConfig reproducing the run"""
        return config_from_dict(self.config)


def _format_value(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_report(report):
    lines = [
        f"tool={report.tool}",
        f"version={report.version}",
        f"reference={report.reference}",
    ]
    lines += [f"config.{key}={_format_value(value)}" for key, value in report.config.items()]
    for record in report.records:
        lines.append("")
        lines.append(SLAVE_SECTION)
        values = record.to_dict()
        lines += [f"{key}={values[key]}" for key in SLAVE_FIELDS]
    return "\n".join(lines) + "\n"


def write_report(path, report):
    """Write a run report, creating the directory if needed"""
    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)
    with open(path, "w") as f:
        f.write(format_report(report))
    return path


def _parse_bool(text):
    return text.strip().lower() == "true"


def _parse_levels(text):
    levels = []
    for item in filter(None, text.split(",")):
        lvl, its, cost, frac = item.split(":")
        levels.append((int(lvl), int(its), float(cost), float(frac)))
    return levels


def _record_from_dict(values):
    return SlaveRecord(
        path=values["path"],
        output=values.get("output", ""),
        theta_deg=float(values["theta_deg"]),
        tx=float(values["tx"]),
        ty=float(values["ty"]),
        levels=_parse_levels(values.get("levels", "")),
        final_cost=float(values.get("final_cost", 0.0)),
        converged=_parse_bool(values.get("converged", "false")),
        swapped=_parse_bool(values.get("swapped", "false")),
        mi_before=float(values.get("mi_before", "nan")),
        mi_after=float(values.get("mi_after", "nan")),
    )


def _key_values(lines):
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line == SLAVE_SECTION:
            yield SLAVE_SECTION, None
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"Malformed report line: {line!r}")
        yield key.strip(), value.strip()


def parse_report(text):
    """
    Parse the text written by format_report

    Returns:
    - RunReport, raises ValueError on malformed lines
    """
    header, config, sections = {}, {}, []
    for key, value in _key_values(text.splitlines()):
        if key == SLAVE_SECTION:
            sections.append({})
        elif sections:
            sections[-1][key] = value
        elif key.startswith("config."):
            config[key[len("config."):]] = value
        else:
            header[key] = value

    return RunReport(
        reference=header.get("reference", ""),
        config=config,
        records=[_record_from_dict(values) for values in sections],
        tool=header.get("tool", TOOL_NAME),
        version=header.get("version", __version__),
    )


def read_report(path):
    with open(path) as f:
        return parse_report(f.read())


def write_truth(path, slave, theta_deg, tx, ty, ev):
    """Ground-truth sidecar of a synthetic slave, values written as given"""
    values = {
        "slave": slave,
        "theta_deg": repr(float(theta_deg)),
        "tx": repr(float(tx)),
        "ty": repr(float(ty)),
        "ev": repr(float(ev)),
    }
    with open(path, "w") as f:
        f.write("".join(f"{key}={values[key]}\n" for key in TRUTH_FIELDS))
    return path


def read_truth(path):
    with open(path) as f:
        values = dict(_key_values(f.read().splitlines()))
    missing = [key for key in TRUTH_FIELDS if key not in values]
    if missing:
        raise ValueError(f"{path}: ground truth is missing {', '.join(missing)}")
    return values
