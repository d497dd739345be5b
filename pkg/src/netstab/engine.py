"""Orbit stepping kernels.

Update expressions are flattened once into an instruction tape over a
flat register file (window slots, constant pool, temporaries).  The tape
is then driven either by a numba-compiled scalar kernel (one trial at a
time) or by a pure-numpy interpreter vectorized across trials.

Backend selection: numba when importable, unless the environment
variable ``NETSTAB_NO_NUMBA`` is set to a truthy value.  Both backends
implement identical semantics; ``benchmarks/bench_orbit.py`` compares
their throughput.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .expr import BinOp, Call, Const, Expr, Var
from .network import TimeDelayedNetwork

__all__ = [
    "Program",
    "compile_network",
    "run_orbit",
    "run_orbit_batch",
    "apply_undelayed",
    "numba_enabled",
]

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap


def numba_enabled() -> bool:
    flag = os.environ.get("NETSTAB_NO_NUMBA", "").strip().lower()
    return HAVE_NUMBA and flag not in ("1", "true", "yes", "on")


OP_ADD = 0
OP_SUB = 1
OP_MUL = 2
OP_DIV = 3
OP_NEG = 4
OP_TANH = 5
OP_SECH = 6
OP_EXP = 7
OP_SIN = 8
OP_COS = 9
OP_ABS = 10
OP_SIGN = 11

_CALL_OPS = {
    "neg": OP_NEG,
    "tanh": OP_TANH,
    "sech": OP_SECH,
    "exp": OP_EXP,
    "sin": OP_SIN,
    "cos": OP_COS,
    "abs": OP_ABS,
    "sign": OP_SIGN,
}

_BIN_OPS = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV}


@dataclass(frozen=True)
class Program:
    """A network's updates compiled to one instruction tape.

    Register layout: ``[0, T*n)`` window slots (slot of node i at delay d
    is ``d*n + i``), then the constant pool, then temporaries.  One pass
    over the tape computes all next-state values simultaneously.
    """

    ops: np.ndarray  # (m, 4) int64: opcode, dst, a, b (-1 when unused)
    consts: np.ndarray  # float64 constant pool
    out_regs: np.ndarray  # (n,) int64 register holding each node's output
    n_regs: int
    n_nodes: int
    T: int
    nodes: tuple[str, ...]

    @property
    def const_offset(self) -> int:
        return self.T * self.n_nodes


def compile_network(net: TimeDelayedNetwork) -> Program:
    n = net.size
    T = net.T
    node_idx = {name: i for i, name in enumerate(net.nodes)}
    const_slots: dict[str, int] = {}
    consts: list[float] = []
    ops: list[tuple[int, int, int, int]] = []
    next_reg = [T * n]  # constant pool claims slots first, temps follow

    def const_slot(v: float) -> int:
        key = repr(v)
        if key not in const_slots:
            const_slots[key] = T * n + len(consts)
            consts.append(v)
        return const_slots[key]

    pending: list[Expr] = [net.updates[node] for node in net.nodes]

    def reserve_consts(e: Expr):
        if isinstance(e, Const):
            const_slot(e.value)
        elif isinstance(e, Call):
            reserve_consts(e.arg)
        elif isinstance(e, BinOp):
            reserve_consts(e.left)
            reserve_consts(e.right)

    for e in pending:
        reserve_consts(e)
    next_reg[0] = T * n + len(consts)

    def emit(e: Expr) -> int:
        if isinstance(e, Var):
            return e.delay * n + node_idx[e.node]
        if isinstance(e, Const):
            return const_slot(e.value)
        if isinstance(e, Call):
            a = emit(e.arg)
            dst = next_reg[0]
            next_reg[0] += 1
            ops.append((_CALL_OPS[e.func], dst, a, -1))
            return dst
        if isinstance(e, BinOp):
            a = emit(e.left)
            b = emit(e.right)
            dst = next_reg[0]
            next_reg[0] += 1
            ops.append((_BIN_OPS[e.op], dst, a, b))
            return dst
        raise TypeError(f"not an expression: {e!r}")

    out_regs = [emit(net.updates[node]) for node in net.nodes]
    ops_arr = (
        np.array(ops, dtype=np.int64)
        if ops
        else np.empty((0, 4), dtype=np.int64)
    )
    return Program(
        ops=ops_arr,
        consts=np.array(consts, dtype=np.float64),
        out_regs=np.array(out_regs, dtype=np.int64),
        n_regs=next_reg[0],
        n_nodes=n,
        T=T,
        nodes=net.nodes,
    )


@njit(cache=True, error_model="numpy")
def _orbit_scalar(ops, consts, out_regs, n_regs, n, T, hist, steps, stop_delta, stop_streak):
    regs = np.zeros(n_regs, dtype=np.float64)
    for j in range(consts.shape[0]):
        regs[T * n + j] = consts[j]
    streak = 0
    for k in range(steps):
        r = T + k
        for d in range(T):
            src = r - 1 - d
            for i in range(n):
                regs[d * n + i] = hist[src, i]
        for t in range(ops.shape[0]):
            op = ops[t, 0]
            dst = ops[t, 1]
            a = regs[ops[t, 2]]
            if op == OP_ADD:
                regs[dst] = a + regs[ops[t, 3]]
            elif op == OP_SUB:
                regs[dst] = a - regs[ops[t, 3]]
            elif op == OP_MUL:
                regs[dst] = a * regs[ops[t, 3]]
            elif op == OP_DIV:
                regs[dst] = a / regs[ops[t, 3]]
            elif op == OP_NEG:
                regs[dst] = -a
            elif op == OP_TANH:
                regs[dst] = math.tanh(a)
            elif op == OP_SECH:
                regs[dst] = 1.0 / math.cosh(a)
            elif op == OP_EXP:
                regs[dst] = math.exp(a)
            elif op == OP_SIN:
                regs[dst] = math.sin(a)
            elif op == OP_COS:
                regs[dst] = math.cos(a)
            elif op == OP_ABS:
                regs[dst] = abs(a)
            else:
                regs[dst] = np.sign(a)
        finite = True
        delta = 0.0
        for i in range(n):
            v = regs[out_regs[i]]
            if not np.isfinite(v):
                finite = False
            dv = abs(v - hist[r - 1, i])
            if dv > delta:
                delta = dv
        if not finite:
            return k, 1
        for i in range(n):
            hist[r, i] = regs[out_regs[i]]
        if stop_delta > 0.0:
            if delta <= stop_delta:
                streak += 1
                if streak >= stop_streak:
                    return k + 1, 0
            else:
                streak = 0
    return steps, 0


def _run_tape_numpy(ops, regs):
    for t in range(ops.shape[0]):
        op, dst, ia, ib = ops[t]
        a = regs[ia]
        if op == OP_ADD:
            regs[dst] = a + regs[ib]
        elif op == OP_SUB:
            regs[dst] = a - regs[ib]
        elif op == OP_MUL:
            regs[dst] = a * regs[ib]
        elif op == OP_DIV:
            regs[dst] = a / regs[ib]
        elif op == OP_NEG:
            regs[dst] = -a
        elif op == OP_TANH:
            regs[dst] = np.tanh(a)
        elif op == OP_SECH:
            regs[dst] = 1.0 / np.cosh(a)
        elif op == OP_EXP:
            regs[dst] = np.exp(a)
        elif op == OP_SIN:
            regs[dst] = np.sin(a)
        elif op == OP_COS:
            regs[dst] = np.cos(a)
        elif op == OP_ABS:
            regs[dst] = np.abs(a)
        else:
            regs[dst] = np.sign(a)


def _orbit_batch_numpy(program: Program, hist, steps, stop_delta, stop_streak):
    n, T = program.n_nodes, program.T
    trials = hist.shape[0]
    regs = np.zeros((program.n_regs, trials), dtype=np.float64)
    regs[program.const_offset : program.const_offset + program.consts.shape[0], :] = (
        program.consts[:, None]
    )
    steps_done = np.full(trials, steps, dtype=np.int64)
    diverged = np.zeros(trials, dtype=bool)
    active = np.ones(trials, dtype=bool)
    streak = np.zeros(trials, dtype=np.int64)
    with np.errstate(all="ignore"):
        for k in range(steps):
            if not active.any():
                break
            r = T + k
            for d in range(T):
                regs[d * n : (d + 1) * n, :] = hist[:, r - 1 - d, :].T
            _run_tape_numpy(program.ops, regs)
            out = regs[program.out_regs, :]  # (n, trials)
            finite = np.isfinite(out).all(axis=0)
            delta = np.max(np.abs(out - hist[:, r - 1, :].T), axis=0)

            newly_diverged = active & ~finite
            steps_done[newly_diverged] = k
            diverged[newly_diverged] = True
            active &= finite

            write = np.nonzero(active)[0]
            hist[write, r, :] = out[:, write].T

            if stop_delta > 0.0:
                streak = np.where(delta <= stop_delta, streak + 1, 0)
                stopping = active & (streak >= stop_streak)
                steps_done[stopping] = k + 1
                active &= ~stopping
    return steps_done, diverged


def run_orbit_batch(
    program: Program,
    histories: np.ndarray,
    steps: int,
    stop_delta: float = 0.0,
    stop_streak: int = 8,
    backend: str | None = None,
):
    """Iterate ``trials`` orbits for up to ``steps`` steps each.

    ``histories`` has shape (trials, T, n) in chronological order, oldest
    snapshot first.  Returns (states, steps_done, diverged) where states
    has shape (trials, T + steps, n); rows of a trial beyond
    ``T + steps_done[t]`` are meaningless.  A positive ``stop_delta``
    stops a trial once the max-norm step change stays at or below it for
    ``stop_streak`` consecutive steps.
    """
    histories = np.asarray(histories, dtype=np.float64)
    trials, T, n = histories.shape
    if T != program.T or n != program.n_nodes:
        raise ValueError(
            f"history shape {histories.shape} does not match program (T={program.T}, n={program.n_nodes})"
        )
    hist = np.zeros((trials, T + steps, n), dtype=np.float64)
    hist[:, :T, :] = histories
    if backend is None:
        backend = "numba" if numba_enabled() else "numpy"
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        steps_done = np.empty(trials, dtype=np.int64)
        diverged = np.zeros(trials, dtype=bool)
        for t in range(trials):
            done, bad = _orbit_scalar(
                program.ops,
                program.consts,
                program.out_regs,
                program.n_regs,
                n,
                T,
                hist[t],
                steps,
                float(stop_delta),
                int(stop_streak),
            )
            steps_done[t] = done
            diverged[t] = bool(bad)
    elif backend == "numpy":
        steps_done, diverged = _orbit_batch_numpy(
            program, hist, steps, float(stop_delta), int(stop_streak)
        )
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return hist, steps_done, diverged


def run_orbit(
    program: Program,
    history: np.ndarray,
    steps: int,
    stop_delta: float = 0.0,
    stop_streak: int = 8,
    backend: str | None = None,
):
    """Single-trial convenience wrapper around :func:`run_orbit_batch`."""
    history = np.asarray(history, dtype=np.float64)
    states, steps_done, diverged = run_orbit_batch(
        program, history[None, :, :], steps, stop_delta, stop_streak, backend
    )
    return states[0], int(steps_done[0]), bool(diverged[0])


def apply_undelayed(program: Program, x: np.ndarray, backend: str | None = None) -> np.ndarray:
    """One application of the map with every window snapshot equal to x."""
    x = np.asarray(x, dtype=np.float64)
    window = np.tile(x, (program.T, 1))
    states, done, diverged = run_orbit(program, window, 1, backend=backend)
    if diverged:
        return np.full(program.n_nodes, np.nan)
    return states[program.T]
