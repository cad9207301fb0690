"""
Pydantic models for reports and the JSON-RPC compute service.
"""

from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field

SCHEMA_VERSION = 1

ExampleId = Literal["folding", "circle", "lattes"]


class Check(BaseModel):
    """One comparison of a computed value against an expected value."""
    name: str = Field(..., description="Short identifier of the checked quantity")
    expected: Any = Field(None, description="Expected value, JSON encoded")
    computed: Any = Field(None, description="Computed value, JSON encoded")
    matched: bool = Field(..., description="Whether the computed value matches")
    reference: str = Field("", description="Statement the expected value comes from")
    heuristic: bool = Field(False, description="True for sampling evidence rather than exact computation")


class ExampleReport(BaseModel):
    """Outcome of reproducing one worked example."""
    schema_version: int = Field(SCHEMA_VERSION, alias="schema")
    example: ExampleId = Field(..., description="Worked example id")
    checks: List[Check] = Field(default_factory=list, description="Expected-value comparisons")
    artifacts: Dict[str, Any] = Field(default_factory=dict, description="Computed branch sets, sequences and solutions")

    model_config = {"populate_by_name": True}

    @property
    def passed(self) -> bool:
        return all(check.matched for check in self.checks)

    def to_json_dict(self) -> Dict[str, Any]:
        data = self.model_dump(mode="json", by_alias=True)
        data["passed"] = self.passed
        return data

    def to_text(self) -> str:
        lines = [f"example {self.example}: {'PASS' if self.passed else 'FAIL'}"]
        for check in self.checks:
            mark = "ok  " if check.matched else "FAIL"
            suffix = " (heuristic)" if check.heuristic else ""
            lines.append(f"  [{mark}] {check.name}: {check.computed}{suffix}")
            if not check.matched:
                lines.append(f"         expected {check.expected}")
        return "\n".join(lines)


# JSON-RPC 2.0

class JSONRPCRequest(BaseModel):
    """JSON-RPC 2.0 request structure."""
    jsonrpc: Literal["2.0"] = Field("2.0", description="JSON-RPC version")
    method: str = Field(..., description="The name of the method to be invoked")
    params: Optional[Dict[str, Any]] = Field(None, description="Parameters for the method")
    id: Optional[Union[str, int]] = Field(None, description="Unique identifier for the request")


class JSONRPCResponse(BaseModel):
    """JSON-RPC 2.0 response structure."""
    jsonrpc: Literal["2.0"] = Field("2.0", description="JSON-RPC version")
    id: Optional[Union[str, int]] = Field(None, description="Identifier matching the request")
    result: Optional[Any] = Field(None, description="The result of the method call")
    error: Optional[Dict[str, Any]] = Field(None, description="Error information if the call failed")


class JSONRPCError(BaseModel):
    """JSON-RPC 2.0 error structure."""
    code: int = Field(..., description="A number that indicates the error type")
    message: str = Field(..., description="A short description of the error")
    data: Optional[Any] = Field(None, description="Additional information about the error")


# Method-specific request models

class SnfRequest(BaseModel):
    """Request for the Smith normal form of an integer matrix."""
    matrix: List[List[int]] = Field(..., description="Row-major integer matrix")


class KSpaceRequest(BaseModel):
    """Request for the K-groups of a catalog space."""
    space: str = Field(..., description="Space descriptor such as 'sphere-minus-9' or 'circle+point'")


class SolveSequenceRequest(BaseModel):
    """Request to solve a six-term exact sequence."""
    sequence: Optional[Dict[str, Any]] = Field(None, description="Six-term sequence JSON")
    example: Optional[ExampleId] = Field(None, description="Use a built-in example sequence instead")
    assume_split: bool = Field(False, description="Report split extensions when the data does not force them")


class AnalyzeMapRequest(BaseModel):
    """Request for branch data of a rational map."""
    expression: str = Field(..., description="Rational function of z, e.g. '(z^2+1)^2/(4*z*(z^2-1))'")
    max_steps: int = Field(20, ge=1, description="Orbit length bound for the postcritical set")
    orbit_tol: Optional[float] = Field(None, gt=0, description="Chordal tolerance for orbit returns")
    seed: Optional[int] = Field(None, description="Seed for the root finder")


class FiberRequest(BaseModel):
    """Request for preimages of a point under a rational map."""
    expression: str = Field(..., description="Rational function of z")
    point: str = Field(..., description="Target point, e.g. '0.3+0.2i' or 'inf'")
    seed: Optional[int] = Field(None, description="Seed for the root finder")


class ProfileRequest(BaseModel):
    """Request for constraint profiles of a piecewise-linear map."""
    map: Union[str, Dict[str, Any]] = Field("fold", description="Named map or breakpoint/value JSON")
    level: int = Field(..., ge=0, description="Level N of the relation R_N")


class ClassesRequest(BaseModel):
    """Request for the R_N classes of a finite model."""
    model: Dict[str, Any] = Field(..., description="Finite model JSON with 'points' and 'map'")
    level: int = Field(..., ge=0, description="Level N of the relation R_N")


class ExampleRequest(BaseModel):
    """Request to run a worked example."""
    example: ExampleId = Field(..., description="Worked example id")
