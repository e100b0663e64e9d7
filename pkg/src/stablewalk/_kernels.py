"""Jitted Monte Carlo kernels for the walk engine.

Every trial owns an independent random stream: a xoshiro256++ generator
seeded through splitmix64 from (master_seed, trial_index).  The stream is a
pure function of those two integers, so results are bitwise independent of
how trials are scheduled across workers.  Kernels release the GIL and are
compiled with fastmath; positions accumulate in plain float64.

One walk kernel per jump family keeps the inner loops free of dispatch:
the hot lanes run a few ns per step, and a censored heavy-tail batch takes
1e11-1e12 steps.  Jump samplers:

gaussian   Marsaglia polar method (two normals per accepted pair)
uniform    signed 53-bit conversion scaled by the halfwidth
stable     trigonometric representation (uniform angle, unit exponential)
cauchy     ratio of uniforms on the half disc, v/u = tan(uniform angle)
mixture    one uniform for the atom, then a base draw

Each sampler is certified against its closed-form characteristic function by
the test suite rather than by its derivation.

Per-trial stream layout: initial-position draws first (none for a point
start, one uniform for an interval start, one polar pair for a gaussian
start), then jump draws.  The walk position is tracked relative to the
target, so a hit is |pos| < eps and an exact hit is pos == 0.0; zero-atom
jumps keep the relative position bit-exactly unchanged, which is what makes
exact-hit tracking sound for point starts at the target.
"""

import numpy as np
from numba import njit, types, uint64

U64 = np.uint64

_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX_A = U64(0xBF58476D1CE4E5B9)
_MIX_B = U64(0x94D049BB133111EB)

TO_U01 = 1.0 / 9007199254740992.0      # 2**-53
TO_S01 = 1.0 / 9223372036854775808.0   # 2**-63, signed conversion

SEED_DERIVATION = "splitmix64-xoshiro256pp-v1"

# model codes shared with the engine layer
GAUSSIAN = 0
UNIFORM = 1
STABLE = 2
CAUCHY = 3
MIXTURE = 4

# initial-distribution codes
INIT_POINT = 0
INIT_UNIFORM = 1
INIT_GAUSS = 2

_KERNEL_FLAGS = dict(cache=True, nogil=True, fastmath=True)


@njit(uint64(uint64), cache=True, nogil=True)
def mix64(z):
    """splitmix64 finalizer; a bijective 64-bit hash."""
    z = z + _GOLDEN
    z = (z ^ (z >> U64(30))) * _MIX_A
    z = (z ^ (z >> U64(27))) * _MIX_B
    return z ^ (z >> U64(31))


@njit(types.UniTuple(uint64, 4)(uint64, uint64), cache=True, nogil=True)
def seed_state(master, trial):
    """Per-trial xoshiro256++ state, derived counter-style from the key pair."""
    z = mix64(master ^ mix64(trial + U64(1)))
    z0 = mix64(z)
    z1 = mix64(z0)
    z2 = mix64(z1)
    z3 = mix64(z2)
    if z0 | z1 | z2 | z3 == U64(0):
        z0 = _GOLDEN
    return z0, z1, z2, z3


@njit(types.UniTuple(uint64, 5)(uint64, uint64, uint64, uint64),
      cache=True, nogil=True, inline="always")
def next64(s0, s1, s2, s3):
    """xoshiro256++ step: returns (output, new state)."""
    res = s0 + s3
    res = ((res << U64(23)) | (res >> U64(41))) + s0
    t = s1 << U64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = (s3 << U64(45)) | (s3 >> U64(19))
    return res, s0, s1, s2, s3


@njit(cache=True, nogil=True)
def rng_stream(master, trial, k):
    """Raw 64-bit outputs of one trial stream (test hook)."""
    s0, s1, s2, s3 = seed_state(U64(master), U64(trial))
    out = np.empty(k, dtype=np.uint64)
    for i in range(k):
        r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
        out[i] = r
    return out


# ---------------------------------------------------------------------------
# Inline jump draws (each threads the rng state through its return value)
# ---------------------------------------------------------------------------

@njit(inline="always", nogil=True)
def _gauss_pair(s0, s1, s2, s3):
    """Polar method: two independent standard normals."""
    while True:
        r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
        a = float(np.int64(r)) * TO_S01
        r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
        b = float(np.int64(r)) * TO_S01
        q = a * a + b * b
        if 0.0 < q < 1.0:
            break
    f = np.sqrt(-2.0 * np.log(q) / q)
    return a * f, b * f, s0, s1, s2, s3


@njit(inline="always", nogil=True)
def _cauchy_draw(s0, s1, s2, s3):
    """Ratio of uniforms on the half disc: v/u is tan of a uniform angle."""
    while True:
        r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
        u = float(r >> U64(11)) * TO_U01
        r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
        v = float(np.int64(r)) * TO_S01
        if u * u + v * v <= 1.0 and u > 0.0:
            break
    return v / u, s0, s1, s2, s3


@njit(inline="always", nogil=True)
def _stable_draw(alpha, inv_a, om_a, s0, s1, s2, s3):
    """Symmetric stable with characteristic function exp(-|t|**alpha)."""
    r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
    theta = np.pi * (float(r >> U64(11)) * TO_U01 - 0.5)
    r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
    w = -np.log(1.0 - float(r >> U64(11)) * TO_U01)
    if w < 1e-300:
        w = 1e-300
    x = (np.sin(alpha * theta) / np.cos(theta) ** inv_a
         * (np.cos((1.0 - alpha) * theta) / w) ** om_a)
    return x, s0, s1, s2, s3


@njit(inline="always", nogil=True)
def _initial_position(init_code, init_a, init_b, x, s0, s1, s2, s3):
    """Starting point relative to the target; consumes stream draws as needed."""
    if init_code == INIT_POINT:
        pos = init_a - x
    elif init_code == INIT_UNIFORM:
        r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
        u = float(r >> U64(11)) * TO_U01
        pos = (init_a + (init_b - init_a) * u) - x
    else:
        z, _, s0, s1, s2, s3 = _gauss_pair(s0, s1, s2, s3)
        pos = (init_a + init_b * z) - x
    return pos, s0, s1, s2, s3


# ---------------------------------------------------------------------------
# Walk kernels, one per family
# ---------------------------------------------------------------------------

@njit(**_KERNEL_FLAGS)
def walk_gaussian(init_code, init_a, init_b, x, eps, cap, master, lo, hi,
                  out_steps, out_censored, out_excluded):
    for i in range(lo, hi):
        s0, s1, s2, s3 = seed_state(master, U64(i))
        pos, s0, s1, s2, s3 = _initial_position(init_code, init_a, init_b, x,
                                                s0, s1, s2, s3)
        hit = np.int64(0)
        n = np.int64(0)
        spare = 0.0
        have = False
        while n < cap:
            if have:
                z = spare
                have = False
            else:
                z, spare, s0, s1, s2, s3 = _gauss_pair(s0, s1, s2, s3)
                have = True
            pos += z
            n += 1
            if abs(pos) < eps:
                hit = n
                break
        out_steps[i] = hit if hit > 0 else cap
        out_censored[i] = 0 if hit > 0 else 1
        out_excluded[i] = 0


@njit(**_KERNEL_FLAGS)
def walk_uniform(halfwidth, init_code, init_a, init_b, x, eps, cap, master,
                 lo, hi, out_steps, out_censored, out_excluded):
    for i in range(lo, hi):
        s0, s1, s2, s3 = seed_state(master, U64(i))
        pos, s0, s1, s2, s3 = _initial_position(init_code, init_a, init_b, x,
                                                s0, s1, s2, s3)
        hit = np.int64(0)
        n = np.int64(0)
        while n < cap:
            r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
            pos += halfwidth * (float(np.int64(r)) * TO_S01)
            n += 1
            if abs(pos) < eps:
                hit = n
                break
        out_steps[i] = hit if hit > 0 else cap
        out_censored[i] = 0 if hit > 0 else 1
        out_excluded[i] = 0


@njit(**_KERNEL_FLAGS)
def walk_stable(alpha, inv_a, om_a, init_code, init_a, init_b, x, eps, cap,
                master, lo, hi, out_steps, out_censored, out_excluded):
    for i in range(lo, hi):
        s0, s1, s2, s3 = seed_state(master, U64(i))
        pos, s0, s1, s2, s3 = _initial_position(init_code, init_a, init_b, x,
                                                s0, s1, s2, s3)
        hit = np.int64(0)
        n = np.int64(0)
        while n < cap:
            z, s0, s1, s2, s3 = _stable_draw(alpha, inv_a, om_a, s0, s1, s2, s3)
            pos += z
            n += 1
            if abs(pos) < eps:
                hit = n
                break
        out_steps[i] = hit if hit > 0 else cap
        out_censored[i] = 0 if hit > 0 else 1
        out_excluded[i] = 0


@njit(**_KERNEL_FLAGS)
def walk_cauchy(init_code, init_a, init_b, x, eps, cap, master, lo, hi,
                out_steps, out_censored, out_excluded):
    for i in range(lo, hi):
        s0, s1, s2, s3 = seed_state(master, U64(i))
        pos, s0, s1, s2, s3 = _initial_position(init_code, init_a, init_b, x,
                                                s0, s1, s2, s3)
        hit = np.int64(0)
        n = np.int64(0)
        while n < cap:
            z, s0, s1, s2, s3 = _cauchy_draw(s0, s1, s2, s3)
            pos += z
            n += 1
            if abs(pos) < eps:
                hit = n
                break
        out_steps[i] = hit if hit > 0 else cap
        out_censored[i] = 0 if hit > 0 else 1
        out_excluded[i] = 0


@njit(**_KERNEL_FLAGS)
def walk_mixture(base_code, p_atom, par, par2, par3, track_exact,
                 init_code, init_a, init_b, x, eps, cap, master, lo, hi,
                 out_steps, out_censored, out_excluded):
    for i in range(lo, hi):
        s0, s1, s2, s3 = seed_state(master, U64(i))
        pos, s0, s1, s2, s3 = _initial_position(init_code, init_a, init_b, x,
                                                s0, s1, s2, s3)
        hit = np.int64(0)
        n = np.int64(0)
        excluded = False
        spare = 0.0
        have = False
        while n < cap:
            r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
            u = float(r >> U64(11)) * TO_U01
            if u >= p_atom:
                if base_code == CAUCHY:
                    z, s0, s1, s2, s3 = _cauchy_draw(s0, s1, s2, s3)
                elif base_code == GAUSSIAN:
                    if have:
                        z = spare
                        have = False
                    else:
                        z, spare, s0, s1, s2, s3 = _gauss_pair(s0, s1, s2, s3)
                        have = True
                elif base_code == STABLE:
                    z, s0, s1, s2, s3 = _stable_draw(par, par2, par3,
                                                     s0, s1, s2, s3)
                else:
                    r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
                    z = par * (float(np.int64(r)) * TO_S01)
                pos += z
            n += 1
            if track_exact and pos == 0.0:
                excluded = True
            if abs(pos) < eps:
                hit = n
                break
        out_steps[i] = hit if hit > 0 else cap
        out_censored[i] = 0 if hit > 0 else 1
        out_excluded[i] = 1 if excluded else 0


# ---------------------------------------------------------------------------
# Walk endpoints (local-limit probe; no hit tests inside the loop)
# ---------------------------------------------------------------------------

@njit(**_KERNEL_FLAGS)
def endpoint_gaussian(n_steps, master, lo, hi, out_sums):
    for i in range(lo, hi):
        s0, s1, s2, s3 = seed_state(master, U64(i))
        pos = 0.0
        k = np.int64(0)
        while k + 2 <= n_steps:
            a, b, s0, s1, s2, s3 = _gauss_pair(s0, s1, s2, s3)
            pos += a + b
            k += 2
        if k < n_steps:
            a, b, s0, s1, s2, s3 = _gauss_pair(s0, s1, s2, s3)
            pos += a
        out_sums[i] = pos


@njit(**_KERNEL_FLAGS)
def endpoint_generic(model_code, base_code, p_atom, par, par2, par3,
                     n_steps, master, lo, hi, out_sums):
    for i in range(lo, hi):
        s0, s1, s2, s3 = seed_state(master, U64(i))
        pos = 0.0
        spare = 0.0
        have = False
        for _ in range(n_steps):
            code = model_code
            skip = False
            if model_code == MIXTURE:
                r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
                u = float(r >> U64(11)) * TO_U01
                if u < p_atom:
                    skip = True
                else:
                    code = base_code
            if not skip:
                if code == CAUCHY:
                    z, s0, s1, s2, s3 = _cauchy_draw(s0, s1, s2, s3)
                elif code == GAUSSIAN:
                    if have:
                        z = spare
                        have = False
                    else:
                        z, spare, s0, s1, s2, s3 = _gauss_pair(s0, s1, s2, s3)
                        have = True
                elif code == STABLE:
                    z, s0, s1, s2, s3 = _stable_draw(par, par2, par3,
                                                     s0, s1, s2, s3)
                else:
                    r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
                    z = par * (float(np.int64(r)) * TO_S01)
                pos += z
        out_sums[i] = pos


@njit(cache=True, nogil=True)
def draw_jumps(model_code, base_code, p_atom, par, par2, par3,
               master, trial, out):
    """Fill ``out`` with consecutive jumps from one trial stream (test hook)."""
    s0, s1, s2, s3 = seed_state(U64(master), U64(trial))
    spare = 0.0
    have = False
    for k in range(out.shape[0]):
        code = model_code
        z = 0.0
        skip = False
        if model_code == MIXTURE:
            r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
            u = float(r >> U64(11)) * TO_U01
            if u < p_atom:
                skip = True
            else:
                code = base_code
        if not skip:
            if code == CAUCHY:
                z, s0, s1, s2, s3 = _cauchy_draw(s0, s1, s2, s3)
            elif code == GAUSSIAN:
                if have:
                    z = spare
                    have = False
                else:
                    z, spare, s0, s1, s2, s3 = _gauss_pair(s0, s1, s2, s3)
                    have = True
            elif code == STABLE:
                z, s0, s1, s2, s3 = _stable_draw(par, par2, par3, s0, s1, s2, s3)
            else:
                r, s0, s1, s2, s3 = next64(s0, s1, s2, s3)
                z = par * (float(np.int64(r)) * TO_S01)
        out[k] = z
    return out
