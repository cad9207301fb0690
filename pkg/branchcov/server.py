"""
JSON-RPC 2.0 compute service.

Exposes the library over HTTP: Smith normal form, K-groups and six-term
sequence solving, rational-map analysis, constraint profiles of PL maps,
finite-model classes and the worked examples.
"""

import asyncio
import json
import logging
from datetime import datetime, timezone
from typing import Any, Callable, Dict, Optional

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import ValidationError
import uvicorn

from . import __version__
from .config import AppConfig, load_config
from .errors import BranchcovError
from .fgab import IntMatrix, smith_normal_form
from .finmodel import load_model, rn_classes
from .ktheory import EXAMPLE_SEQUENCES, SixTermSequence, k_groups, parse_space, solve_six_term
from .models import (
    SCHEMA_VERSION,
    AnalyzeMapRequest,
    ClassesRequest,
    ExampleRequest,
    FiberRequest,
    JSONRPCError,
    JSONRPCRequest,
    JSONRPCResponse,
    KSpaceRequest,
    ProfileRequest,
    SnfRequest,
    SolveSequenceRequest,
)
from .plcover import constraint_profile, generic_class_size, load_pl_map, named_map
from .ratmap import parse_rational_map, postcritical_set, preimages, puncture_count
from .sphere import parse_point
from .worked_examples import run_example

logger = logging.getLogger(__name__)

PARSE_ERROR = -32700
INVALID_REQUEST = -32600
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603
COMPUTATION_ERROR = -32000


class ComputeServer:
    """JSON-RPC server wrapping the branchcov computations."""

    def __init__(self, config: Optional[AppConfig] = None):
        self.config = config or load_config()

        self.app = FastAPI(
            title='branchcov compute service',
            description='K-theory and dynamics computations for branched coverings',
            version=__version__,
        )

        self.app.add_middleware(
            CORSMiddleware,
            allow_origins=['*'],
            allow_methods=['*'],
            allow_headers=['*'],
        )

        # Method handlers
        self._method_handlers: Dict[str, Callable[[Dict[str, Any]], Any]] = {
            'snf': self._handle_snf,
            'ktheory.kspace': self._handle_kspace,
            'ktheory.solve': self._handle_solve,
            'ratmap.analyze': self._handle_analyze,
            'ratmap.fiber': self._handle_fiber,
            'plmap.profile': self._handle_profile,
            'finmodel.classes': self._handle_classes,
            'example.run': self._handle_example,
        }

        self._setup_routes()

    def _setup_routes(self) -> None:
        """Setup FastAPI routes."""

        @self.app.post('/')
        async def handle_jsonrpc(request: Request):
            """Handle JSON-RPC 2.0 requests."""
            return await self._handle_jsonrpc_request(request)

        @self.app.get('/health')
        async def health_check():
            """Health check endpoint."""
            return {
                'status': 'healthy',
                'version': __version__,
                'methods': sorted(self._method_handlers),
                'timestamp': datetime.now(timezone.utc).isoformat(),
            }

    async def _handle_jsonrpc_request(self, request: Request) -> Response:
        """Handle incoming JSON-RPC request."""
        body = await request.body()
        try:
            request_data = json.loads(body)
        except json.JSONDecodeError:
            return self._create_error_response(None, PARSE_ERROR, 'Parse error')

        try:
            rpc_request = JSONRPCRequest.model_validate(request_data)
        except ValidationError:
            request_id = request_data.get('id') if isinstance(request_data, dict) else None
            return self._create_error_response(request_id, INVALID_REQUEST, 'Invalid Request')

        method_handler = self._method_handlers.get(rpc_request.method)
        if not method_handler:
            return self._create_error_response(rpc_request.id, METHOD_NOT_FOUND, 'Method not found')

        params = rpc_request.params or {}
        try:
            result = await asyncio.to_thread(method_handler, params)
        except ValidationError as e:
            return self._create_error_response(
                rpc_request.id, INVALID_PARAMS, 'Invalid params', data=json.loads(e.json(include_url=False))
            )
        except BranchcovError as e:
            logger.info(f'{rpc_request.method} failed: {e}')
            return self._create_error_response(
                rpc_request.id, COMPUTATION_ERROR, str(e), data={'type': type(e).__name__}
            )
        except Exception as e:
            logger.error(f'Error handling method {rpc_request.method}: {e}')
            return self._create_error_response(rpc_request.id, INTERNAL_ERROR, f'Internal error: {e}')

        return self._create_success_response(rpc_request.id, {'schema': SCHEMA_VERSION, **result})

    def _create_success_response(self, request_id: Any, result: Any) -> JSONResponse:
        """Create a successful JSON-RPC response."""
        response = JSONRPCResponse(id=request_id, result=result)
        return JSONResponse(content=response.model_dump(exclude_none=True))

    def _create_error_response(
        self, request_id: Any, code: int, message: str, data: Any = None
    ) -> JSONResponse:
        """Create an error JSON-RPC response."""
        error = JSONRPCError(code=code, message=message, data=data)
        response = JSONRPCResponse(id=request_id, error=error.model_dump(exclude_none=True))
        return JSONResponse(
            content=response.model_dump(exclude_none=True),
            status_code=400 if code != INTERNAL_ERROR else 500,
        )

    # Handlers run in a worker thread and return plain JSON dicts.

    def _handle_snf(self, params: Dict[str, Any]) -> Dict[str, Any]:
        request = SnfRequest.model_validate(params)
        form = smith_normal_form(IntMatrix.from_rows(request.matrix))
        return {'u': form.u.to_rows(), 'd': form.d.to_rows(), 'v': form.v.to_rows()}

    def _handle_kspace(self, params: Dict[str, Any]) -> Dict[str, Any]:
        request = KSpaceRequest.model_validate(params)
        pair = k_groups(parse_space(request.space))
        return {'space': request.space, 'k0': str(pair.k0), 'k1': str(pair.k1), 'groups': pair.model_dump()}

    def _handle_solve(self, params: Dict[str, Any]) -> Dict[str, Any]:
        request = SolveSequenceRequest.model_validate(params)
        if request.example:
            seq = EXAMPLE_SEQUENCES[request.example]()
        elif request.sequence is not None:
            seq = SixTermSequence.model_validate(request.sequence)
        else:
            raise BranchcovError("either 'sequence' or 'example' is required")
        solution = solve_six_term(seq, assume_split=request.assume_split)
        return {'sequence': seq.to_json_dict(), 'solution': solution.model_dump(mode='json')}

    def _handle_analyze(self, params: Dict[str, Any]) -> Dict[str, Any]:
        request = AnalyzeMapRequest.model_validate(params)
        tolerances = self.config.tolerances
        seed = self.config.seed if request.seed is None else request.seed
        q = parse_rational_map(request.expression, tolerances)
        branch = postcritical_set(q, request.max_steps, request.orbit_tol, tolerances=tolerances, seed=seed)
        return {'map': str(q), **branch.to_dict(), 'punctures': puncture_count(branch, tolerances)}

    def _handle_fiber(self, params: Dict[str, Any]) -> Dict[str, Any]:
        request = FiberRequest.model_validate(params)
        seed = self.config.seed if request.seed is None else request.seed
        q = parse_rational_map(request.expression, self.config.tolerances)
        fiber = preimages(q, parse_point(request.point), self.config.tolerances, seed)
        return {'fiber': [{'point': p.to_dict(), 'multiplicity': m} for p, m in fiber]}

    def _handle_profile(self, params: Dict[str, Any]) -> Dict[str, Any]:
        request = ProfileRequest.model_validate(params)
        m = named_map(request.map) if isinstance(request.map, str) else load_pl_map(request.map)
        profiles = constraint_profile(m, request.level)
        return {
            'level': request.level,
            'generic_size': generic_class_size(m, request.level),
            'profiles': [p.to_dict() for p in profiles],
        }

    def _handle_classes(self, params: Dict[str, Any]) -> Dict[str, Any]:
        request = ClassesRequest.model_validate(params)
        return rn_classes(load_model(request.model), request.level).model_dump()

    def _handle_example(self, params: Dict[str, Any]) -> Dict[str, Any]:
        request = ExampleRequest.model_validate(params)
        report = run_example(request.example, self.config.tolerances, self.config.seed)
        return report.to_json_dict()

    async def start(self, host: Optional[str] = None, port: Optional[int] = None) -> None:
        """Start the compute server."""
        host = host or self.config.host
        port = port or self.config.port
        logger.info(f'Starting branchcov compute service on http://{host}:{port}')
        config = uvicorn.Config(self.app, host=host, port=port, log_level=self.config.log_level.lower())
        server = uvicorn.Server(config)
        await server.serve()


def create_app(config: Optional[AppConfig] = None) -> FastAPI:
    return ComputeServer(config).app
