"""Jump-law families for the random walk.

Every shipped family has a closed-form characteristic function and the exact
power-law norming ``A_n = n**(1/alpha)``, so the stable limit of ``S_n / A_n``
and its density at zero are known analytically.  Monte Carlo error therefore
lives entirely on the hitting-time side of the toolkit.

The families are:

``gaussian``    standard normal jumps (alpha = 2, limit N(0, 1))
``uniform:h``   uniform on [-h, h]    (alpha = 2, limit N(0, h**2/3))
``stable:a``    symmetric stable, characteristic function exp(-|t|**a), a in (1, 2]
``cauchy``      standard Cauchy       (alpha = 1, S_n / n is again standard Cauchy)
``mix:p:base``  an atom of mass p at zero mixed with an atomless base family

Only the mixture has an atom, and only at zero; lattice jump laws are not
representable, which keeps ``sup_|t|>=t0 |E exp(itX)| < 1`` for every family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError

GAUSSIAN = "gaussian"
UNIFORM = "uniform"
STABLE = "stable"
CAUCHY = "cauchy"
MIXTURE = "mix"

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class JumpModel:
    """Immutable description of a jump law.

    Instances are shareable across worker threads; all randomness is drawn
    from caller-owned generators.  Use the module-level constructors rather
    than instantiating directly.
    """

    kind: str
    alpha: float
    halfwidth: float = 0.0
    atom_weight: float = 0.0
    base: Optional["JumpModel"] = None

    @property
    def beta(self) -> float:
        """Conjugate exponent: 1/alpha + 1/beta = 1, with beta = inf at alpha = 1."""
        if self.alpha == 1.0:
            return math.inf
        return self.alpha / (self.alpha - 1.0)

    @property
    def has_atom(self) -> bool:
        return self.kind == MIXTURE

    def norming(self) -> "NormingSequence":
        return NormingSequence(self.alpha)

    def descriptor(self) -> str:
        """Config-file string form; inverse of :func:`parse_model`."""
        if self.kind == GAUSSIAN:
            return "gaussian"
        if self.kind == UNIFORM:
            return f"uniform:{self.halfwidth!r}"
        if self.kind == STABLE:
            return f"stable:{self.alpha!r}"
        if self.kind == CAUCHY:
            return "cauchy"
        return f"mix:{self.atom_weight!r}:{self.base.descriptor()}"


@dataclass(frozen=True)
class NormingSequence:
    """The scaling sequence A_n = n**(1/alpha) that makes S_n / A_n converge.

    Exact for all shipped families.  Regularly varying of index 1/alpha:
    A_{2n} / A_n == 2**(1/alpha) holds exactly here, not just in the limit.
    """

    alpha: float

    @property
    def exponent(self) -> float:
        return 1.0 / self.alpha

    def value(self, n):
        """A_n for scalar or array n >= 1."""
        return np.asarray(n, dtype=float) ** self.exponent if np.ndim(n) else float(n) ** self.exponent


def gaussian_unit() -> JumpModel:
    return JumpModel(kind=GAUSSIAN, alpha=2.0)


def uniform_sym(halfwidth: float) -> JumpModel:
    if not (halfwidth > 0.0 and math.isfinite(halfwidth)):
        raise ValidationError(f"uniform halfwidth must be positive, got {halfwidth}")
    return JumpModel(kind=UNIFORM, alpha=2.0, halfwidth=float(halfwidth))


def symmetric_stable(alpha: float) -> JumpModel:
    # alpha = 1 is available as cauchy_standard(); alpha < 1 is transient.
    if not (1.0 < alpha <= 2.0):
        raise ValidationError(f"stable index must lie in (1, 2], got {alpha}")
    return JumpModel(kind=STABLE, alpha=float(alpha))


def cauchy_standard() -> JumpModel:
    return JumpModel(kind=CAUCHY, alpha=1.0)


def zero_atom_mixture(p: float, base: JumpModel) -> JumpModel:
    """Jump law equal to 0 with probability p, else a draw from ``base``.

    The base must be atomless so the mixture's only atom sits at zero.  The
    base norming is kept, so the limit of S_n / A_n is the base limit scaled
    by (1-p)**(1/alpha).
    """
    if not (0.0 <= p < 1.0):
        raise ValidationError(f"atom mass must lie in [0, 1), got {p}")
    if base.kind == MIXTURE:
        raise ValidationError("mixture base must be an atomless family")
    return JumpModel(kind=MIXTURE, alpha=base.alpha, atom_weight=float(p), base=base)


def parse_model(descriptor: str) -> JumpModel:
    """Parse a model descriptor like ``gaussian``, ``uniform:0.5``, ``mix:0.5:cauchy``."""
    parts = descriptor.strip().split(":")
    kind = parts[0]
    try:
        if kind == "gaussian" and len(parts) == 1:
            return gaussian_unit()
        if kind == "uniform" and len(parts) == 2:
            return uniform_sym(float(parts[1]))
        if kind == "stable" and len(parts) == 2:
            return symmetric_stable(float(parts[1]))
        if kind == "cauchy" and len(parts) == 1:
            return cauchy_standard()
        if kind == "mix" and len(parts) >= 3:
            return zero_atom_mixture(float(parts[1]), parse_model(":".join(parts[2:])))
    except ValidationError:
        raise
    except ValueError as exc:
        raise ValidationError(f"bad model descriptor {descriptor!r}: {exc}") from None
    raise ValidationError(f"unknown model descriptor {descriptor!r}")


# ---------------------------------------------------------------------------
# Sampling (numpy reference implementations; the walk engine has jitted twins)
# ---------------------------------------------------------------------------

def sample_jump(model: JumpModel, rng: np.random.Generator) -> float:
    """One draw from the jump law."""
    return float(sample_jumps(model, 1, rng)[0])


def sample_jumps(model: JumpModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized draws; the zero-atom mixture returns exact 0.0 with mass p."""
    if model.kind == GAUSSIAN:
        return rng.standard_normal(n)
    if model.kind == UNIFORM:
        return rng.uniform(-model.halfwidth, model.halfwidth, n)
    if model.kind == CAUCHY:
        return rng.standard_cauchy(n)
    if model.kind == STABLE:
        return _stable_draws(model.alpha, n, rng)
    atom = rng.random(n) < model.atom_weight
    out = sample_jumps(model.base, n, rng)
    out[atom] = 0.0
    return out


def _stable_draws(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    # Trigonometric representation for the symmetric case: with Theta uniform
    # on (-pi/2, pi/2) and W unit exponential,
    #   sin(a Theta) / cos(Theta)**(1/a) * (cos((1-a) Theta) / W)**((1-a)/a)
    # has characteristic function exp(-|t|**a).  At a = 2 this reduces to
    # 2 sin(Theta) sqrt(W), i.e. N(0, 2).
    theta = np.pi * (rng.random(n) - 0.5)
    w = rng.standard_exponential(n)
    w = np.maximum(w, 1e-300)
    inv_a = 1.0 / alpha
    return (
        np.sin(alpha * theta)
        / np.cos(theta) ** inv_a
        * (np.cos((1.0 - alpha) * theta) / w) ** ((1.0 - alpha) * inv_a)
    )


# ---------------------------------------------------------------------------
# Characteristic function and Cramer diagnostics
# ---------------------------------------------------------------------------

def char_fn(model: JumpModel, t) -> np.ndarray:
    """E[exp(itX)] -- real-valued since every family is symmetric."""
    t = np.asarray(t, dtype=float)
    if model.kind == GAUSSIAN:
        return np.exp(-0.5 * t * t)
    if model.kind == UNIFORM:
        # sin(ht)/(ht) with the removable singularity at t = 0
        return np.sinc(model.halfwidth * t / np.pi)
    if model.kind == STABLE:
        return np.exp(-np.abs(t) ** model.alpha)
    if model.kind == CAUCHY:
        return np.exp(-np.abs(t))
    p = model.atom_weight
    return p + (1.0 - p) * char_fn(model.base, t)


def char_fn_modulus(model: JumpModel, t) -> float:
    """|E[exp(itX)]| for scalar t (arrays pass through elementwise)."""
    out = np.abs(char_fn(model, t))
    return float(out) if np.ndim(out) == 0 else out


def cramer_margin(model: JumpModel, t_min: float, t_max: float, grid: int) -> float:
    """Max of |E exp(itX)| over a uniform grid on [t_min, t_max].

    A value strictly below 1 certifies, at probe resolution, that the law is
    non-lattice on the probed frequency range.
    """
    if not (0.0 < t_min < t_max):
        raise ValidationError(f"need 0 < t_min < t_max, got [{t_min}, {t_max}]")
    if grid < 2:
        raise ValidationError(f"need at least 2 grid points, got {grid}")
    ts = np.linspace(t_min, t_max, int(grid))
    return float(np.max(np.abs(char_fn(model, ts))))


# ---------------------------------------------------------------------------
# Stable-limit data
# ---------------------------------------------------------------------------

def limit_density_at_zero(model: JumpModel) -> float:
    """Density at 0 of the distributional limit of S_n / A_n.

    gaussian:   limit N(0,1), 1/sqrt(2 pi)
    uniform:    limit N(0, h**2/3) since Var = h**2/3 and A_n = sqrt(n)
    stable(a):  density (1/pi) Integral_0^inf exp(-t**a) dt = Gamma(1/a)/(a pi)
    cauchy:     1/pi
    mixture:    base value / (1-p)**(1/alpha); the base norming is kept, so
                the limit is the base limit shrunk by (1-p)**(1/alpha).
    """
    if model.kind == GAUSSIAN:
        return 1.0 / _SQRT_2PI
    if model.kind == UNIFORM:
        return math.sqrt(3.0) / (model.halfwidth * _SQRT_2PI)
    if model.kind == STABLE:
        return math.gamma(1.0 / model.alpha) / (model.alpha * math.pi)
    if model.kind == CAUCHY:
        return 1.0 / math.pi
    thin = (1.0 - model.atom_weight) ** (1.0 / model.alpha)
    return limit_density_at_zero(model.base) / thin


def escape_probability(model: JumpModel, x: float) -> float:
    """Probability that the zero-start walk never lands exactly on x.

    Atomless families: exact hits have probability zero, so 1 for every x.
    Zero-atom mixture: S_n = 0 exactly iff every jump so far is zero, an
    event of probability p**n; the union over n >= 1 is {X_1 = 0}.  Hence
    1 - p at x = 0.  For x != 0 the only atom of S_n is at 0, so again 1.
    """
    if model.kind == MIXTURE and x == 0.0:
        return 1.0 - model.atom_weight
    return 1.0


def recurrence_constant(model: JumpModel) -> float:
    """The normalizing constant 2 * f_X(0) * P(no exact return to 0)."""
    return 2.0 * limit_density_at_zero(model) * escape_probability(model, 0.0)
