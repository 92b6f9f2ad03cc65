"""Request and response bodies for the planning service."""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

Pair = list[float]


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PolygonModel(BaseModel):
    id: str = "roi"
    outer: list[Pair]
    holes: list[list[Pair]] = Field(default_factory=list)


class FootprintModel(Strict):
    width: Optional[float] = None
    altitude: Optional[float] = None
    half_angle: Optional[float] = None


class LimitsModel(Strict):
    v_max: Optional[float] = None
    a_max: Optional[float] = None
    j_max: Optional[float] = None  # omitted or null -> unbounded jerk


class GAModel(Strict):
    population: Optional[int] = None
    generations: Optional[int] = None
    elite_fraction: Optional[float] = None
    tournament_size: Optional[int] = None
    p_mut_order: Optional[float] = None
    p_mut_choice: Optional[float] = None
    lambda_turns: Optional[float] = None


class ConfigModel(Strict):
    footprint: Optional[FootprintModel] = None
    alpha: Optional[float] = None
    rho: Optional[float] = None
    limits: Optional[LimitsModel] = None
    exact_limit: Optional[int] = None
    seed: Optional[int] = None
    ga: Optional[GAModel] = None


class PlanRequest(BaseModel):
    roi: PolygonModel
    pipeline: str = "ours-dp"
    config: Optional[ConfigModel] = None
    include_svg: bool = False
    include_partitions: bool = False


class PlanMetrics(BaseModel):
    length: float
    turns: int
    time: float
    partitions: int
    cost: float
    coverage: float


class PlanDocument(BaseModel):
    id: str
    solver: str
    order: list[int]
    choices: list[int]
    total_cost: float
    waypoints: list[Pair]
    connectors: list[list[Pair]]
    metrics: Optional[PlanMetrics] = None


class PlanResponse(BaseModel):
    plan: PlanDocument
    partitions: Optional[dict] = None
    svg: Optional[str] = None


class DecomposeRequest(BaseModel):
    roi: PolygonModel
    method: Literal["ours", "bcd"] = "ours"
    config: Optional[ConfigModel] = None
    include_svg: bool = False


class DecomposeResponse(BaseModel):
    partitions: dict
    svg: Optional[str] = None


class GenRequest(BaseModel):
    seed: int = 1
    count: int = Field(13, ge=1)
    families: Optional[list[str]] = None
    cell_size: float = Field(10.0, gt=0)


class GenResponse(BaseModel):
    polygons: list[PolygonModel]


class VerifyRequest(BaseModel):
    roi: PolygonModel
    waypoints: list[Pair] = Field(min_length=1)
    config: Optional[ConfigModel] = None


class VerifyResponse(BaseModel):
    coverage: float
    alpha: float
    passed: bool
    cells: int


class BenchRequest(BaseModel):
    rois: Optional[list[PolygonModel]] = None
    corpus: Optional[GenRequest] = None
    pipelines: list[str] = Field(default_factory=lambda: ["ours-dp", "ours-ga", "bcd-dp", "bcd-ga", "nn"])
    config: Optional[ConfigModel] = None
    include_svgs: bool = False


class OverheadRowModel(BaseModel):
    pipeline: str
    mu_time: float
    mu_length: float
    mu_turns: float
    wins: int
    top3: int


class BenchResponse(BaseModel):
    csv: str
    table: list[OverheadRowModel]
    summary: str
    svgs: dict[str, str] = Field(default_factory=dict)
