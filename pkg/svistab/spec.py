"""Problem-spec files: schema, validation and instance builders."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .config import MAX_DIM, Tolerances, resolve_tolerances
from .errors import InputError, SpecError, SviError
from .geometry import Box, ConeSpec, body_from_record
from .parametric import Objective
from .setmaps import InclusionInstance, SetMap, map_from_record

SPEC_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class WindowSpec(_Strict):
    lo: list[float]
    hi: list[float]

    @model_validator(mode="after")
    def _ordered(self) -> "WindowSpec":
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi must have the same length")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError("lo must not exceed hi")
        return self

    def build(self) -> Box:
        return Box(self.lo, self.hi)


class _MapBase(_Strict):
    p_dim: int = Field(1, ge=1, le=MAX_DIM)
    x_dim: int = Field(1, ge=1, le=MAX_DIM)
    lipschitz_p_hint: float | None = None


class EpigraphSpec(_MapBase):
    kind: Literal["epigraph"]
    f: str
    concave_in_x: bool = False


class FanSpec(_MapBase):
    kind: Literal["fan"]
    matrices: list[list[list[float]]] = Field(min_length=1)
    sensitivities: list[list[list[list[float]]]] | None = None


class ConstantSpec(_MapBase):
    kind: Literal["constant"]
    set: dict[str, Any]


class SwitchSpec(_MapBase):
    kind: Literal["sqrt_interval", "halfline_sign"]
    variable: Literal["p", "x"] = "p"


MapSpec = Annotated[Union[EpigraphSpec, FanSpec, ConstantSpec, SwitchSpec], Field(discriminator="kind")]


class ConeRecord(_Strict):
    kind: Literal["halfline", "orthant", "generators", "halfspaces"]
    dim: int | None = Field(None, ge=1, le=MAX_DIM)
    generators: list[list[float]] | None = None
    normals: list[list[float]] | None = None

    @model_validator(mode="after")
    def _fields_for_kind(self) -> "ConeRecord":
        needed = {"orthant": "dim", "generators": "generators", "halfspaces": "normals"}.get(self.kind)
        if needed and getattr(self, needed) is None:
            raise ValueError(f"{self.kind} cone needs {needed!r}")
        return self

    def build(self) -> ConeSpec:
        if self.kind == "halfline":
            return ConeSpec.halfline()
        if self.kind == "orthant":
            return ConeSpec.orthant(self.dim)
        if self.kind == "generators":
            return ConeSpec.from_generators(self.generators, dim=self.dim)
        return ConeSpec.from_halfspaces(self.normals, dim=self.dim)


class ObjectiveSpec(_Strict):
    expression: str
    lip_const_hint: float | None = Field(None, ge=0)


class InstanceSpec(_Strict):
    id: str = Field(min_length=1)
    description: str = ""
    map: MapSpec
    cone: ConeRecord
    pbar: list[float]
    xbar: list[float]
    x_window: WindowSpec
    p_window: WindowSpec
    objective: ObjectiveSpec | None = None
    seed: int | None = None


# Parameters accepted by each analysis op

class _Params(_Strict):
    pass


class PointParams(_Params):
    p: list[float] | None = None
    x: list[float] | None = None


class SliceParams(_Params):
    p: list[float] | None = None
    grid_n: int = Field(201, ge=16)


class StrongSlopeParams(_Params):
    p: list[float] | None = None
    x: list[float]
    r_schedule: list[float] | None = None
    dirs_n: int = Field(64, ge=2)


class BandParams(_Params):
    eps_schedule: list[float] | None = None
    grid_n: int = Field(41, ge=3)


class TauParams(_Params):
    region: WindowSpec | None = None
    grid_n: int | list[int] | None = None


class ModulusParams(_Params):
    map: Literal["solv", "F_p", "F_x"] = "solv"
    y: list[float] | None = None
    delta_schedule: list[float] | None = None
    grid_n: int | None = Field(None, ge=3)
    zeta: float | None = Field(None, gt=0)


class ValueParams(_Params):
    p: list[float] | None = None


class SweepParams(_Params):
    p_values: list[list[float]] | None = None
    n: int = Field(21, ge=2)


class ValCalmParams(_Params):
    delta_schedule: list[float] | None = None
    tau_region: WindowSpec | None = None


class IncreaseParams(_Params):
    alpha: float | None = Field(None, gt=1)
    alpha_max: float = Field(4.0, gt=1)
    variant: Literal["global", "local", "uniform"] = "global"
    delta: float | None = Field(None, gt=0)
    r_schedule: list[float] | None = None
    search_budget: int = Field(64, ge=1)


class FanParams(_Params):
    sample_n: int = Field(512, ge=0)
    search_budget: int = Field(64, ge=1)


class IdentityParams(_Params):
    set: dict[str, Any]
    r: float = Field(ge=0)


class SupportParams(_Params):
    set: dict[str, Any]
    dirs_n: int = Field(128, ge=2)


class CertifyParams(_Params):
    bound_override: float | None = None
    delta_schedule: list[float] | None = None
    zeta: float | None = Field(None, gt=0)
    x_region: WindowSpec | None = None
    alpha: float | None = Field(None, gt=1)
    delta: float | None = Field(None, gt=0)


OP_PARAMS: dict[str, type[_Params]] = {
    "phi": PointParams,
    "solve_slice": SliceParams,
    "strong_slope": StrongSlopeParams,
    "strict_outer_slope": BandParams,
    "partial_strict_outer_slope": BandParams,
    "tau": TauParams,
    "error_bound": TauParams,
    "liplsc": ModulusParams,
    "calm": ModulusParams,
    "lipusc": ModulusParams,
    "liploc": ModulusParams,
    "lip_p": ModulusParams,
    "lip_joint": ModulusParams,
    "value_at": ValueParams,
    "val_sweep": SweepParams,
    "val_calmness": ValCalmParams,
    "check_c_increase": IncreaseParams,
    "certified_alpha": IncreaseParams,
    "fan_bound": FanParams,
    "interiority": FanParams,
    "bundle_bound": ValueParams,
    "excess_identities": IdentityParams,
    "support_distance": SupportParams,
    "certify_liplsc": CertifyParams,
    "certify_calm": CertifyParams,
    "certify_lipusc": CertifyParams,
    "certify_val": CertifyParams,
    "certify_increase_slope": CertifyParams,
}

CERTIFY_OPS = frozenset(op for op in OP_PARAMS if op.startswith("certify_"))


class AnalysisSpec(_Strict):
    id: str = Field(min_length=1)
    op: str
    instance: str
    params: dict[str, Any] = Field(default_factory=dict)

    @field_validator("op")
    @classmethod
    def _known_op(cls, v: str) -> str:
        if v not in OP_PARAMS:
            raise ValueError(f"unknown op {v!r}; expected one of {sorted(OP_PARAMS)}")
        return v

    @model_validator(mode="after")
    def _check_params(self) -> "AnalysisSpec":
        try:
            OP_PARAMS[self.op].model_validate(self.params)
        except ValidationError as e:
            details = "; ".join(
                f"params.{'.'.join(str(part) for part in err['loc'])}: {err['msg']}" for err in e.errors()
            )
            raise ValueError(details) from None
        return self

    def parsed_params(self) -> _Params:
        return OP_PARAMS[self.op].model_validate(self.params)


class SpecFile(_Strict):
    version: Literal[1] = SPEC_VERSION
    seed: int = 0
    tolerances: dict[str, float] = Field(default_factory=dict)
    instances: list[InstanceSpec] = Field(min_length=1)
    analyses: list[AnalysisSpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def _references(self) -> "SpecFile":
        ids = [inst.id for inst in self.instances]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise ValueError(f"duplicate instance ids: {dupes}")
        aids = [a.id for a in self.analyses]
        dupes = sorted({i for i in aids if aids.count(i) > 1})
        if dupes:
            raise ValueError(f"duplicate analysis ids: {dupes}")
        missing = sorted({a.instance for a in self.analyses} - set(ids))
        if missing:
            raise ValueError(f"analyses refer to unknown instances: {missing}")
        return self


def _diagnostics(err: ValidationError) -> list[tuple[str, str]]:
    return [(".".join(str(part) for part in e["loc"]) or "<root>", e["msg"]) for e in err.errors()]


def parse_spec(data: Any) -> SpecFile:
    """Validate a decoded spec document."""
    try:
        return SpecFile.model_validate(data)
    except ValidationError as e:
        raise SpecError("Spec file failed validation", diagnostics=_diagnostics(e)) from e


def load_spec(path: Path) -> tuple[SpecFile, bytes]:
    """Read and validate a spec file; returns the model and the raw bytes for hashing."""
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise SpecError(f"Cannot read spec file {path}: {e}") from e
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        loc = f"line {e.lineno}, column {e.colno}" if isinstance(e, json.JSONDecodeError) else "<bytes>"
        raise SpecError(f"Spec file {path} is not valid JSON", diagnostics=[(loc, str(e))]) from e
    return parse_spec(data), raw


def _build_map(spec: Any) -> SetMap:
    return map_from_record(spec.model_dump(exclude_none=True))


def build_instance(spec: InstanceSpec, tolerances: Tolerances, seed: int) -> InclusionInstance:
    """Turn a validated instance record into an InclusionInstance with the given seed."""
    where = f"instances.{spec.id}"
    try:
        F = _build_map(spec.map)
        objective = None
        if spec.objective is not None:
            objective = Objective.from_expression(
                spec.objective.expression, F.p_dim, F.x_dim, spec.objective.lip_const_hint
            )
        return InclusionInstance(
            id=spec.id,
            F=F,
            C=spec.cone.build(),
            pbar=spec.pbar,
            xbar=spec.xbar,
            x_window=spec.x_window.build(),
            p_window=spec.p_window.build(),
            objective=objective,
            tolerances=tolerances,
            seed=seed,
            description=spec.description,
        )
    except SviError as e:
        raise SpecError(f"Instance {spec.id!r} is invalid", diagnostics=[(where, str(e))]) from e


def build_instances(spec: SpecFile, seed: int | None = None, environ=None) -> dict[str, InclusionInstance]:
    """All instances of a spec with tolerances resolved (defaults < spec < env override).

    A seed passed here wins over per-instance and file-level seeds.
    """
    tolerances = resolve_tolerances(spec.tolerances, environ)

    def seed_for(inst: InstanceSpec) -> int:
        if seed is not None:
            return seed
        return inst.seed if inst.seed is not None else spec.seed

    return {inst.id: build_instance(inst, tolerances, seed_for(inst)) for inst in spec.instances}


def build_body(record: dict[str, Any], where: str):
    try:
        return body_from_record(record)
    except (InputError, TypeError, ValueError) as e:
        raise SpecError(f"Invalid body at {where}", diagnostics=[(where, str(e))]) from e
