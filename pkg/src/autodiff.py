# src/autodiff.py

"""
Autodiff Module
---------------
Scalar computation graph with differentiation passes whose results are graph
nodes themselves, so derivatives can be differentiated again.

A Graph is evaluated over a batch of independent *lanes*: a free variable is
either batched (one value per lane, e.g. the x coordinate of every collocation
point) or a plain scalar (e.g. a network parameter). Every opcode acts
elementwise on lanes; `batch_sum` is the only opcode that couples lanes and
reduces them to one scalar.

Two differentiation passes are provided:

* `grad(output, wrt)`   reverse mode, many inputs, one output.
* `jvp(outputs, wrt)`   forward mode, one input, many outputs.

Both append to the same graph and can be nested in any order.
"""

from __future__ import annotations

from enum import IntEnum
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import StructuralError

Value = Union[float, np.ndarray]
Operand = Union["Variable", float, int]


class Op(IntEnum):
    CONST = 0
    VAR = 1
    ADD = 2
    SUB = 3
    MUL = 4
    DIV = 5
    NEG = 6
    POWI = 7
    TANH = 8
    SIN = 9
    COS = 10
    EXP = 11
    SQRT = 12
    ABS2 = 13
    LINEAR = 14
    BATCH_SUM = 15


def _linear_kernel(n_pairs: int) -> Callable[..., Value]:
    def kernel(*values: Value) -> Value:
        acc = None
        for k in range(n_pairs):
            term = values[2 * k] * values[2 * k + 1]
            acc = term if acc is None else acc + term
        for single in values[2 * n_pairs :]:
            acc = single if acc is None else acc + single
        return 0.0 if acc is None else acc

    return kernel


def _powi_kernel(power: int) -> Callable[[Value], Value]:
    def kernel(a: Value) -> Value:
        return a**power

    return kernel


def _batch_sum(a: Value) -> Value:
    return np.sum(a) if isinstance(a, np.ndarray) else a


_KERNELS: Dict[Op, Callable[..., Value]] = {
    Op.ADD: lambda a, b: a + b,
    Op.SUB: lambda a, b: a - b,
    Op.MUL: lambda a, b: a * b,
    Op.DIV: lambda a, b: a / b,
    Op.NEG: lambda a: -a,
    Op.TANH: np.tanh,
    Op.SIN: np.sin,
    Op.COS: np.cos,
    Op.EXP: np.exp,
    Op.SQRT: np.sqrt,
    Op.ABS2: lambda u, v: u * u + v * v,
    Op.BATCH_SUM: _batch_sum,
}

_UNSET = object()


class Variable:
    """Handle to one node of a Graph. Valid only against the Graph that created it."""

    __slots__ = ("graph", "index")

    def __init__(self, graph: "Graph", index: int) -> None:
        self.graph = graph
        self.index = index

    @property
    def value(self) -> Optional[Value]:
        return self.graph._values[self.index]

    @property
    def batched(self) -> bool:
        return self.graph._batched[self.index]

    @property
    def op(self) -> Op:
        return self.graph._ops[self.index]

    def __add__(self, other: Operand) -> "Variable":
        return self.graph.add(self, other)

    def __radd__(self, other: Operand) -> "Variable":
        return self.graph.add(other, self)

    def __sub__(self, other: Operand) -> "Variable":
        return self.graph.sub(self, other)

    def __rsub__(self, other: Operand) -> "Variable":
        return self.graph.sub(other, self)

    def __mul__(self, other: Operand) -> "Variable":
        return self.graph.mul(self, other)

    def __rmul__(self, other: Operand) -> "Variable":
        return self.graph.mul(other, self)

    def __truediv__(self, other: Operand) -> "Variable":
        return self.graph.div(self, other)

    def __rtruediv__(self, other: Operand) -> "Variable":
        return self.graph.div(other, self)

    def __neg__(self) -> "Variable":
        return self.graph.neg(self)

    def __pow__(self, power: int) -> "Variable":
        return self.graph.powi(self, power)

    def __hash__(self) -> int:
        return hash((id(self.graph), self.index))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Variable)
            and other.graph is self.graph
            and other.index == self.index
        )

    def __repr__(self) -> str:
        return f"Variable({self.op.name}#{self.index})"


class Graph:
    """
    Append-only scalar computation graph.

    Nodes are stored in creation order, so every node's operands precede it.
    Values are cached on creation (when all operands have values) and
    recomputed in order by `eval`.
    """

    def __init__(self) -> None:
        self._ops: List[Op] = []
        self._args: List[Tuple[int, ...]] = []
        self._payload: List[Any] = []
        self._batched: List[bool] = []
        self._values: List[Optional[Value]] = []
        self._program: List[Tuple[int, Callable[..., Value], Tuple[int, ...]]] = []
        self._free: Dict[str, int] = {}
        self._constants: Dict[Tuple[float, bool], int] = {}
        self._partials: Dict[Tuple[int, int], Any] = {}

    def __len__(self) -> int:
        return len(self._ops)

    # ------------------------------------------------------------------
    # node construction
    # ------------------------------------------------------------------

    def _node(
        self,
        op: Op,
        args: Tuple[int, ...],
        payload: Any = None,
        kernel: Optional[Callable[..., Value]] = None,
    ) -> int:
        index = len(self._ops)
        kernel = kernel or _KERNELS[op]
        self._ops.append(op)
        self._args.append(args)
        self._payload.append(payload)
        if op == Op.BATCH_SUM:
            self._batched.append(False)
        else:
            self._batched.append(any(self._batched[a] for a in args))
        operand_values = [self._values[a] for a in args]
        if any(v is None for v in operand_values):
            self._values.append(None)
        else:
            self._values.append(kernel(*operand_values))
        self._program.append((index, kernel, args))
        return index

    def _constant_index(self, value: float) -> int:
        value = float(value)
        key = (value, np.signbit(value))
        index = self._constants.get(key)
        if index is None:
            index = len(self._ops)
            self._ops.append(Op.CONST)
            self._args.append(())
            self._payload.append(value)
            self._batched.append(False)
            self._values.append(value)
            self._constants[key] = index
        return index

    def constant(self, value: float) -> Variable:
        """Returns the (shared) constant node holding `value`."""
        return Variable(self, self._constant_index(value))

    def variable(self, name: str, value: Optional[Value] = None, batched: bool = False) -> Variable:
        """
        Registers a free variable.

        Args:
            name (str): Unique name used in bindings.
            value (Optional[Value]): Initial value; None leaves it unbound.
            batched (bool): One value per lane when True, a scalar otherwise.
        """
        if name in self._free:
            raise StructuralError(f"free variable '{name}' is already registered")
        index = len(self._ops)
        self._ops.append(Op.VAR)
        self._args.append(())
        self._payload.append(name)
        self._batched.append(batched)
        self._values.append(None)
        self._free[name] = index
        if value is not None:
            self._values[index] = self._coerce_binding(index, value)
        return Variable(self, index)

    def free_variables(self) -> Dict[str, Variable]:
        return {name: Variable(self, index) for name, index in self._free.items()}

    def _index(self, operand: Operand) -> int:
        if isinstance(operand, Variable):
            if operand.graph is not self:
                raise StructuralError("variables from different graphs cannot be combined")
            return operand.index
        if isinstance(operand, (int, float, np.floating, np.integer)):
            return self._constant_index(float(operand))
        raise StructuralError(f"cannot use {type(operand).__name__} as a graph operand")

    def _own(self, variable: Variable) -> Variable:
        if not isinstance(variable, Variable) or variable.graph is not self:
            raise StructuralError("variable does not belong to this graph")
        return variable

    def add(self, a: Operand, b: Operand) -> Variable:
        return Variable(self, self._node(Op.ADD, (self._index(a), self._index(b))))

    def sub(self, a: Operand, b: Operand) -> Variable:
        return Variable(self, self._node(Op.SUB, (self._index(a), self._index(b))))

    def mul(self, a: Operand, b: Operand) -> Variable:
        return Variable(self, self._node(Op.MUL, (self._index(a), self._index(b))))

    def div(self, a: Operand, b: Operand) -> Variable:
        return Variable(self, self._node(Op.DIV, (self._index(a), self._index(b))))

    def neg(self, a: Operand) -> Variable:
        return Variable(self, self._node(Op.NEG, (self._index(a),)))

    def powi(self, a: Operand, power: int) -> Variable:
        if int(power) != power:
            raise StructuralError(f"powi needs an integer exponent, got {power}")
        power = int(power)
        return Variable(
            self, self._node(Op.POWI, (self._index(a),), power, _powi_kernel(power))
        )

    def tanh(self, a: Operand) -> Variable:
        return Variable(self, self._node(Op.TANH, (self._index(a),)))

    def sin(self, a: Operand) -> Variable:
        return Variable(self, self._node(Op.SIN, (self._index(a),)))

    def cos(self, a: Operand) -> Variable:
        return Variable(self, self._node(Op.COS, (self._index(a),)))

    def exp(self, a: Operand) -> Variable:
        return Variable(self, self._node(Op.EXP, (self._index(a),)))

    def sqrt(self, a: Operand) -> Variable:
        return Variable(self, self._node(Op.SQRT, (self._index(a),)))

    def abs2(self, u: Operand, v: Operand) -> Variable:
        """|h|² = u² + v² for h = u + iv."""
        return Variable(self, self._node(Op.ABS2, (self._index(u), self._index(v))))

    def linear(
        self, pairs: Iterable[Tuple[Operand, Operand]], singles: Iterable[Operand] = ()
    ) -> Variable:
        """Σ aₖ·bₖ + Σ sⱼ as one node."""
        pair_indices = [(self._index(a), self._index(b)) for a, b in pairs]
        single_indices = [self._index(s) for s in singles]
        return Variable(self, self._linear_index(pair_indices, single_indices))

    def _linear_index(self, pairs: Sequence[Tuple[int, int]], singles: Sequence[int]) -> int:
        args = tuple(i for pair in pairs for i in pair) + tuple(singles)
        if not args:
            return self._constant_index(0.0)
        return self._node(Op.LINEAR, args, len(pairs), _linear_kernel(len(pairs)))

    def batch_sum(self, a: Operand) -> Variable:
        """Sums a lane-valued node into a scalar."""
        return Variable(self, self._node(Op.BATCH_SUM, (self._index(a),)))

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------

    def _resolve_free(self, key: Union[Variable, str]) -> int:
        if isinstance(key, str):
            if key not in self._free:
                raise StructuralError(f"unknown free variable '{key}'")
            return self._free[key]
        index = self._own(key).index
        if self._ops[index] != Op.VAR:
            raise StructuralError(f"{key!r} is not a free variable")
        return index

    def _coerce_binding(self, index: int, value: Value) -> Value:
        if self._batched[index]:
            array = np.asarray(value, dtype=np.float64)
            if array.ndim != 1:
                raise StructuralError(
                    f"batched variable '{self._payload[index]}' needs a 1-D array of lane values"
                )
            return array
        array = np.asarray(value, dtype=np.float64)
        if array.ndim != 0:
            raise StructuralError(f"variable '{self._payload[index]}' takes a scalar value")
        return float(array)

    def assign(self, variables: Sequence[Variable], values: Sequence[float]) -> None:
        """Sets scalar free variables in bulk without re-evaluating."""
        if len(variables) != len(values):
            raise StructuralError(
                f"assign got {len(variables)} variables and {len(values)} values"
            )
        cache = self._values
        for variable, value in zip(variables, values):
            cache[self._resolve_free(variable)] = float(value)

    def eval(self, bindings: Optional[Mapping[Union[Variable, str], Value]] = None) -> None:
        """
        Binds free variables and recomputes every cached node value in order.

        Raises:
            StructuralError: a free variable has no value, or lanes disagree.
        """
        for key, value in (bindings or {}).items():
            index = self._resolve_free(key)
            self._values[index] = self._coerce_binding(index, value)
        lane_counts = set()
        for name, index in self._free.items():
            value = self._values[index]
            if value is None:
                raise StructuralError(f"free variable '{name}' is unbound")
            if self._batched[index]:
                lane_counts.add(value.shape[0])
        if len(lane_counts) > 1:
            raise StructuralError(f"batched variables disagree on lane count: {sorted(lane_counts)}")
        values = self._values
        for index, kernel, args in self._program:
            values[index] = kernel(*[values[a] for a in args])

    def value(self, variable: Variable) -> Optional[Value]:
        return self._values[self._own(variable).index]

    # ------------------------------------------------------------------
    # differentiation
    # ------------------------------------------------------------------

    def _partial(self, node: int, slot: int) -> Optional[int]:
        """Node holding ∂node/∂operand[slot]; None stands for exactly 1."""
        key = (node, slot)
        cached = self._partials.get(key, _UNSET)
        if cached is not _UNSET:
            return cached
        op = self._ops[node]
        args = self._args[node]
        partial: Optional[int]
        if op in (Op.ADD, Op.BATCH_SUM):
            partial = None
        elif op == Op.SUB:
            partial = None if slot == 0 else self._constant_index(-1.0)
        elif op == Op.MUL:
            partial = args[1 - slot]
        elif op == Op.DIV:
            if slot == 0:
                partial = self._node(Op.DIV, (self._constant_index(1.0), args[1]))
            else:
                ratio = self._node(Op.DIV, (node, args[1]))
                partial = self._node(Op.NEG, (ratio,))
        elif op == Op.NEG:
            partial = self._constant_index(-1.0)
        elif op == Op.POWI:
            power = self._payload[node]
            if power == 0:
                partial = self._constant_index(0.0)
            elif power == 1:
                partial = None
            elif power == 2:
                partial = self._node(Op.MUL, (self._constant_index(2.0), args[0]))
            else:
                lower = self._node(Op.POWI, args, power - 1, _powi_kernel(power - 1))
                partial = self._node(Op.MUL, (self._constant_index(float(power)), lower))
        elif op == Op.TANH:
            square = self._node(Op.MUL, (node, node))
            partial = self._node(Op.SUB, (self._constant_index(1.0), square))
        elif op == Op.SIN:
            partial = self._node(Op.COS, args)
        elif op == Op.COS:
            partial = self._node(Op.NEG, (self._node(Op.SIN, args),))
        elif op == Op.EXP:
            partial = node
        elif op == Op.SQRT:
            partial = self._node(Op.DIV, (self._constant_index(0.5), node))
        elif op == Op.ABS2:
            partial = self._node(Op.MUL, (self._constant_index(2.0), args[slot]))
        elif op == Op.LINEAR:
            partial = args[slot ^ 1] if slot < 2 * self._payload[node] else None
        else:
            raise StructuralError(f"{op.name} nodes have no operands to differentiate")
        self._partials[key] = partial
        return partial

    def _accumulate(self, terms: Sequence[Tuple[int, Optional[int]]], reduce_lanes: bool) -> int:
        """Builds Σ term[0]·term[1] (term[1] None meaning 1) as a single node."""
        one = self._constant_index(1.0)
        pairs: List[Tuple[int, int]] = []
        singles: List[int] = []
        for factor, partial in terms:
            if partial is None or partial == one:
                singles.append(factor)
            elif factor == one:
                singles.append(partial)
            else:
                pairs.append((factor, partial))
        if not pairs and len(singles) == 1:
            index = singles[0]
        elif len(pairs) == 1 and not singles:
            index = self._node(Op.MUL, pairs[0])
        else:
            index = self._linear_index(pairs, singles)
        if reduce_lanes and self._batched[index]:
            index = self._node(Op.BATCH_SUM, (index,))
        return index

    def _dependents(self, sources: Iterable[int], lo: int, hi: int) -> bytearray:
        depends = bytearray(hi + 1)
        for source in sources:
            if source <= hi:
                depends[source] = 1
        args = self._args
        for i in range(lo, hi + 1):
            if depends[i]:
                continue
            for a in args[i]:
                if depends[a]:
                    depends[i] = 1
                    break
        return depends

    def _require_free(self, variables: Sequence[Variable]) -> None:
        for variable in variables:
            if self._ops[variable.index] != Op.VAR:
                raise StructuralError(
                    f"can only differentiate with respect to free variables, got {variable!r}"
                )

    def grad(self, output: Variable, wrt: Sequence[Variable]) -> List[Variable]:
        """
        Reverse-mode derivatives ∂output/∂wrt_k as new nodes on this graph.

        A lane-valued output is differentiated lane by lane, which requires
        every `wrt` to be lane-valued too.

        Raises:
            StructuralError: mixed graphs, non-free `wrt`, or a non-scalar output.
        """
        output = self._own(output)
        wrt = [self._own(w) for w in wrt]
        self._require_free(wrt)
        out = output.index
        if self._batched[out] and any(not self._batched[w.index] for w in wrt):
            raise StructuralError(
                "non-scalar output: a lane-valued output can only be differentiated "
                "with respect to lane-valued variables"
            )
        if not wrt:
            return []
        targets = {w.index for w in wrt}
        lo = min(targets)
        depends = self._dependents(targets, lo, out)
        results: Dict[int, int] = {}
        if out >= lo and depends[out]:
            if self._batched[out] and any(
                depends[i] and self._ops[i] == Op.BATCH_SUM for i in range(lo, out + 1)
            ):
                raise StructuralError("non-scalar output: lanes are coupled through batch_sum")
            pending: Dict[int, List[Tuple[int, Optional[int]]]] = {
                out: [(self._constant_index(1.0), None)]
            }
            for i in range(out, lo - 1, -1):
                terms = pending.pop(i, None)
                if terms is None:
                    continue
                adjoint = self._accumulate(terms, reduce_lanes=not self._batched[i])
                if i in targets:
                    results[i] = adjoint
                    continue
                for slot, operand in enumerate(self._args[i]):
                    if operand >= lo and depends[operand]:
                        pending.setdefault(operand, []).append(
                            (adjoint, self._partial(i, slot))
                        )
        zero = self._constant_index(0.0)
        return [Variable(self, results.get(w.index, zero)) for w in wrt]

    def jvp(self, outputs: Sequence[Variable], wrt: Variable) -> List[Variable]:
        """
        Forward-mode derivatives d output_k / d wrt for many outputs in one pass.

        With a lane-valued `wrt` every lane is seeded with 1, giving per-lane
        derivatives for lane-valued outputs.
        """
        outputs = [self._own(o) for o in outputs]
        wrt = self._own(wrt)
        self._require_free([wrt])
        zero = self._constant_index(0.0)
        if not outputs:
            return []
        source = wrt.index
        hi = max(o.index for o in outputs)
        if hi < source:
            return [Variable(self, zero) for _ in outputs]
        depends = self._dependents([source], source, hi)
        needed = bytearray(hi + 1)
        for o in outputs:
            if depends[o.index]:
                needed[o.index] = 1
        args = self._args
        for i in range(hi, source, -1):
            if needed[i]:
                for a in args[i]:
                    if depends[a]:
                        needed[a] = 1
        tangent: Dict[int, int] = {source: self._constant_index(1.0)}
        for i in range(source + 1, hi + 1):
            if not needed[i]:
                continue
            terms = [
                (tangent[a], self._partial(i, slot))
                for slot, a in enumerate(args[i])
                if a in tangent
            ]
            tangent[i] = self._accumulate(terms, reduce_lanes=not self._batched[i])
        return [Variable(self, tangent.get(o.index, zero)) for o in outputs]


# ----------------------------------------------------------------------
# functional front end
# ----------------------------------------------------------------------


def _graph_of(*operands: Operand) -> Graph:
    for operand in operands:
        if isinstance(operand, Variable):
            return operand.graph
    raise StructuralError("at least one operand must be a graph Variable")


def tanh(a: Variable) -> Variable:
    return _graph_of(a).tanh(a)


def sin(a: Variable) -> Variable:
    return _graph_of(a).sin(a)


def cos(a: Variable) -> Variable:
    return _graph_of(a).cos(a)


def exp(a: Variable) -> Variable:
    return _graph_of(a).exp(a)


def sqrt(a: Variable) -> Variable:
    return _graph_of(a).sqrt(a)


def abs2(u: Operand, v: Operand) -> Variable:
    return _graph_of(u, v).abs2(u, v)


def linear(pairs: Sequence[Tuple[Operand, Operand]], singles: Sequence[Operand] = ()) -> Variable:
    pairs = list(pairs)
    singles = list(singles)
    flat = [x for pair in pairs for x in pair] + singles
    return _graph_of(*flat).linear(pairs, singles)


def batch_sum(a: Variable) -> Variable:
    return _graph_of(a).batch_sum(a)


def grad(output: Variable, wrt: Sequence[Variable]) -> List[Variable]:
    """Reverse-mode derivatives of `output` with respect to free variables `wrt`."""
    if not isinstance(output, Variable):
        raise StructuralError("output must be a graph Variable")
    for w in wrt:
        if not isinstance(w, Variable) or w.graph is not output.graph:
            raise StructuralError("variables from different graphs cannot be differentiated together")
    return output.graph.grad(output, wrt)


def jvp(outputs: Sequence[Variable], wrt: Variable) -> List[Variable]:
    """Forward-mode derivatives of several `outputs` with respect to one free variable."""
    if not isinstance(wrt, Variable):
        raise StructuralError("wrt must be a graph Variable")
    for o in outputs:
        if not isinstance(o, Variable) or o.graph is not wrt.graph:
            raise StructuralError("variables from different graphs cannot be differentiated together")
    return wrt.graph.jvp(outputs, wrt)


def evaluate(graph: Graph, bindings: Optional[Mapping[Union[Variable, str], Value]] = None) -> None:
    """Binds free variables and refreshes every cached value of `graph`."""
    graph.eval(bindings)
