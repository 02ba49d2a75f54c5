"""Named analytic data profiles evaluated at cell centres."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("constant", "gaussian", "sine-product")


@dataclass(frozen=True)
class Profile:
    """``constant``: ``value``; ``gaussian``: ``amplitude * exp(-|x - center|^2 / width^2)``;
    ``sine-product``: ``amplitude * prod_i sin(pi * mode * x_i)``."""

    kind: str = "constant"
    value: float = 0.0
    amplitude: float = 1.0
    center: tuple[float, ...] = field(default=(0.5, 0.5))
    width: float = 0.25
    mode: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "gaussian" and not self.width > 0:
            raise ValueError(f"gaussian width must be positive, got {self.width}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at points ``x`` of shape ``(npts, dim)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "constant":
            return np.full(len(x), float(self.value))
        if self.kind == "gaussian":
            c = np.asarray(self.center)
            if c.size != x.shape[1]:
                raise ValueError(f"gaussian center has {c.size} components, points have {x.shape[1]}")
            r2 = ((x - c) ** 2).sum(axis=1)
            return self.amplitude * np.exp(-r2 / self.width**2)
        return self.amplitude * np.prod(np.sin(np.pi * self.mode * x), axis=1)

    @property
    def is_zero(self) -> bool:
        if self.kind == "constant":
            return self.value == 0.0
        return self.amplitude == 0.0

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "constant":
            out["value"] = float(self.value)
        elif self.kind == "gaussian":
            out.update(amplitude=float(self.amplitude), center=list(self.center), width=float(self.width))
        else:
            out.update(amplitude=float(self.amplitude), mode=int(self.mode))
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Profile":
        allowed = {"kind", "value", "amplitude", "center", "width", "mode"}
        extra = set(d) - allowed
        if extra:
            raise ValueError(f"unknown profile keys {sorted(extra)}")
        return cls(**d)


ZERO = Profile("constant", value=0.0)


@dataclass(frozen=True)
class DataProfiles:
    f: Profile = ZERO
    f_b: Profile = ZERO
    h: Profile = ZERO
    h_b: Profile = ZERO
