"""Configuration handling for entropy-clustering"""

import json
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from .graph import KernelSpec


class KernelConfig(BaseModel):
    """Similarity kernel; sigma is ignored by the cosine kernel"""
    kind: Literal["gaussian", "cosine"] = "gaussian"
    sigma: float = Field(default=10.0, gt=0)

    def to_spec(self) -> KernelSpec:
        return KernelSpec(kind=self.kind, sigma=self.sigma)


class GraphConfig(BaseModel):
    """Data graph construction"""
    kernel: KernelConfig = Field(default_factory=KernelConfig)
    p: Union[int, Literal["auto"]] = Field(default="auto", description="Neighbors per vertex or 'auto'")
    n_clusters: Optional[int] = Field(default=None, ge=1, description="k used by p='auto' when no labels")

    @field_validator('p')
    @classmethod
    def validate_p(cls, v):
        if isinstance(v, int) and v < 1:
            raise ValueError("p must be a positive integer or 'auto'")
        return v


class GenerationConfig(BaseModel):
    """Constraints sampled from ground-truth labels"""
    kind: Literal["pairwise", "label"] = "pairwise"
    amount: float = Field(default=0.2, ge=0.0, le=1.0, description="Fraction of n per constraint type")
    seed: int = 0


class ConstraintConfig(BaseModel):
    """Where prior knowledge comes from; neither source means unsupervised"""
    path: Optional[Path] = None
    generate: Optional[GenerationConfig] = None

    @field_validator('path', mode='before')
    @classmethod
    def validate_path(cls, v):
        if v is None:
            return v
        path = Path(v)
        if not path.is_file():
            raise ValueError(f"Constraint file not found: {path}")
        return path

    @model_validator(mode='after')
    def single_source(self):
        if self.path is not None and self.generate is not None:
            raise ValueError("Give either a constraint file or a generation spec, not both")
        return self


class Hyperparams(BaseModel):
    """Optimizer knobs shared by the flat and hierarchical searches"""
    phi: float = Field(default=2.0, ge=0.0, description="Penalty weight")
    height: int = Field(default=3, ge=2, description="Target encoding tree height K")
    t_max: int = Field(default=100, ge=1, description="Max moving-stage sweeps")
    tol: float = Field(default=1e-12, ge=0.0)
    max_merges: Optional[int] = Field(default=None, ge=0)
    moving: bool = Field(default=True, description="Run the moving stage after merging")


class OutputConfig(BaseModel):
    """Configuration for output settings"""
    directory: Path = Field(default=Path("./results"))

    @field_validator('directory', mode='before')
    @classmethod
    def create_directory(cls, v):
        path = Path(v)
        path.mkdir(parents=True, exist_ok=True)
        return path


class RunConfig(BaseModel):
    """Main configuration class"""
    input_path: Path
    header: bool = False
    has_labels: bool = Field(default=False, description="Last CSV column holds ground-truth labels")
    graph: GraphConfig = Field(default_factory=GraphConfig)
    constraints: ConstraintConfig = Field(default_factory=ConstraintConfig)
    optimizer: Hyperparams = Field(default_factory=Hyperparams)
    output: OutputConfig = Field(default_factory=OutputConfig)
    repeats: int = Field(default=1, ge=1)
    jobs: int = Field(default=1, ge=1)

    @field_validator('input_path', mode='before')
    @classmethod
    def validate_input(cls, v):
        path = Path(v)
        if not path.exists():
            raise ValueError(f"Input file not found: {path}")
        if not path.is_file():
            raise ValueError(f"Input path is not a file: {path}")
        return path

    @model_validator(mode='after')
    def labels_for_generation(self):
        if self.constraints.generate is not None and not self.has_labels:
            raise ValueError("Generating constraints needs a labeled input (has_labels)")
        return self

    @classmethod
    def from_yaml(cls, config_path: Path) -> "RunConfig":
        """Load configuration from YAML file"""
        return cls(**load_mapping(config_path))

    @classmethod
    def from_json(cls, config_path: Path) -> "RunConfig":
        """Load configuration from JSON file"""
        with open(config_path, 'r') as f:
            data = json.load(f)
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to a JSON/YAML-safe dictionary"""
        return self.model_dump(mode='json')

    def save_yaml(self, path: Path) -> None:
        """Save configuration to YAML file"""
        with open(path, 'w') as f:
            yaml.dump(self.to_dict(), f, default_flow_style=False, sort_keys=False)

    def save_json(self, path: Path) -> None:
        """Save configuration to JSON file"""
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2)


def load_mapping(config_path: Path) -> Dict[str, Any]:
    """Read a YAML or JSON config file into a plain dict"""
    path = Path(config_path)
    with open(path, 'r') as f:
        if path.suffix.lower() == '.json':
            data = json.load(f)
        else:
            data = yaml.safe_load(f)
    return data or {}


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Nested dict merge where None values in ``override`` never replace anything.

    Args:
        base: Lower-precedence mapping, e.g. the contents of a config file
        override: Higher-precedence mapping, e.g. command-line flags

    Returns:
        A new dict; None leaves of ``override`` are dropped at every depth
    """
    merged = dict(base)
    for key, value in override.items():
        if value is None:
            continue
        if isinstance(value, dict):
            nested = merged.get(key)
            merged[key] = deep_merge(nested if isinstance(nested, dict) else {}, value)
        else:
            merged[key] = value
    return merged
