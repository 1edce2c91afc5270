"""
Fitted preprocessing state shared between training and scoring.

``transforms.json`` holds, per task, the label encoder, the scaler and the
selected feature list, so a saved test set can be re-scored with exactly the
projection the models were trained on.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Union

from ..analysis.preprocess import LabelEncoder, Scaler

TRANSFORMS_FILE = "transforms.json"
TRANSFORMS_VERSION = 1


@dataclass
class TaskTransforms:
    """What turns a cleaned table into one task's model input."""

    label_column: str
    encoder: LabelEncoder
    scaler: Scaler
    features: List[str]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label_column": self.label_column,
            "encoder": self.encoder.to_dict(),
            "scaler": self.scaler.to_dict(),
            "features": list(self.features),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TaskTransforms":
        return cls(
            label_column=data["label_column"],
            encoder=LabelEncoder.from_dict(data["encoder"]),
            scaler=Scaler.from_dict(data["scaler"]),
            features=list(data["features"]),
        )


@dataclass
class Transforms:
    tasks: Dict[str, TaskTransforms] = field(default_factory=dict)
    drop_columns: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "version": TRANSFORMS_VERSION,
            "drop_columns": list(self.drop_columns),
            "tasks": {name: t.to_dict() for name, t in sorted(self.tasks.items())},
        }


def save_transforms(transforms: Transforms, directory: Union[str, Path]) -> Path:
    path = Path(directory) / TRANSFORMS_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(transforms.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_transforms(directory: Union[str, Path]) -> Transforms:
    data = json.loads((Path(directory) / TRANSFORMS_FILE).read_text(encoding="utf-8"))
    if data.get("version") != TRANSFORMS_VERSION:
        raise ValueError(f"Unsupported transforms version: {data.get('version')}")
    return Transforms(
        tasks={name: TaskTransforms.from_dict(t) for name, t in data["tasks"].items()},
        drop_columns=list(data.get("drop_columns", [])),
    )
