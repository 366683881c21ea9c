"""formwatch: learn a web application's form structure, monitor traffic against it."""

from .capture import FormRequest, parse_capture_line, parse_capture_text, parse_query_string
from .classify import (
    ClassifiedRequest,
    ControlSetDiff,
    ConstraintVerdict,
    DummyReason,
    Level1Result,
    LevelStatus,
    classify,
    level1_match,
    level2_diff,
    level3_check,
)
from .crawler import CrawlConfig, CrawlReport, crawl, extract_forms, group_by_destination, resolve_action
from .estimator import FormAnomalyDetector, NotFittedError
from .model import (
    ApplicationStructure,
    ControlConstraint,
    ControlSpec,
    ControlType,
    DestinationGroup,
    FormMethod,
    FormStructure,
    compute_form_id,
    infer_mandatory,
    validate_structure,
)
from .scenes import CircleScene, DetailScene, LaneScene, layout_control, layout_form, layout_overview
from .simulate import LabeledRequest, MutationKind, gen_normal, generate_corpus, mutate
from .structure_io import load_structure, save_structure
from .svg import render_svg

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ApplicationStructure",
    "CircleScene",
    "ClassifiedRequest",
    "ConstraintVerdict",
    "ControlConstraint",
    "ControlSetDiff",
    "ControlSpec",
    "ControlType",
    "CrawlConfig",
    "CrawlReport",
    "DestinationGroup",
    "DetailScene",
    "DummyReason",
    "FormAnomalyDetector",
    "FormMethod",
    "FormRequest",
    "FormStructure",
    "LabeledRequest",
    "LaneScene",
    "Level1Result",
    "LevelStatus",
    "MutationKind",
    "NotFittedError",
    "classify",
    "compute_form_id",
    "crawl",
    "extract_forms",
    "gen_normal",
    "generate_corpus",
    "group_by_destination",
    "infer_mandatory",
    "layout_control",
    "layout_form",
    "layout_overview",
    "level1_match",
    "level2_diff",
    "level3_check",
    "load_structure",
    "mutate",
    "parse_capture_line",
    "parse_capture_text",
    "parse_query_string",
    "render_svg",
    "resolve_action",
    "save_structure",
    "validate_structure",
]
