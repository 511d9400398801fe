"""Plain-text run configurations and state files.

Run configuration: one ``key = value`` per line, keys are the long CLI flag
names without dashes (``family``, ``criterion``, ``k``, ``p`` ...). ``#``
starts a comment.

State file::

    # three-qubit GHZ with 10% white noise
    dims = 2 2 2
    noise = 0.1
    component = 0.9
    000 : 0.70710678
    111 : 0.70710678

``component`` opens a new pure component; its weight may be omitted when the
file has a single component (the weight is then ``1 - noise``). Term lines
are ``label : amplitude``. A label is a digit string (``0102``) or, for local
dimensions above 10, integers separated by spaces, commas or dots. Amplitudes
are Python complex literals (``0.5``, ``-0.5j``, ``0.3+0.1j``) and are
normalised per component.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .qstate import MixtureState, PureStateSparse, StateError, check_dims, make_pure_sparse


class ConfigError(ValueError):
    pass


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_key_values(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("_", "-")] = value
    return out


def parse_label(text: str) -> tuple[int, ...]:
    text = text.strip()
    if re.search(r"[\s,.]", text):
        return tuple(int(x) for x in re.split(r"[\s,.]+", text) if x)
    if not text.isdigit():
        raise ConfigError(f"bad label {text!r}")
    return tuple(int(c) for c in text)


def parse_int_list(text: str) -> list[int]:
    return [int(x) for x in re.split(r"[\s,]+", text.strip()) if x]


@dataclass(frozen=True)
class StateFile:
    dims: tuple[int, ...]
    noise: float
    components: tuple[tuple[float | None, PureStateSparse], ...]

    def mixture(self) -> MixtureState:
        comps = list(self.components)
        if len(comps) == 1 and comps[0][0] is None:
            comps = [(1.0 - self.noise, comps[0][1])]
        if any(w is None for w, _ in comps):
            raise ConfigError("every component needs a weight when there are several")
        try:
            return MixtureState([(w, s) for w, s in comps if w > 0], self.noise, self.dims)
        except StateError as exc:
            raise ConfigError(str(exc)) from exc

    def pure_pair(self) -> tuple[PureStateSparse, PureStateSparse]:
        if len(self.components) != 2:
            raise ConfigError(f"a sweep family needs exactly two components, got {len(self.components)}")
        return self.components[0][1], self.components[1][1]


def parse_state_file(text: str) -> StateFile:
    dims = None
    noise = 0.0
    blocks: list[tuple[float | None, list]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        try:
            if ":" in line:
                if not blocks:
                    raise ConfigError("term before any 'component' line")
                label, amp = line.split(":", 1)
                blocks[-1][1].append((parse_label(label), complex(amp.strip().replace(" ", ""))))
                continue
            if line == "component":
                blocks.append((None, []))
                continue
            if "=" not in line:
                raise ConfigError(f"unrecognised line {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "dims":
                dims = check_dims(parse_int_list(value))
            elif key == "noise":
                noise = float(value)
            elif key == "component":
                blocks.append((float(value) if value else None, []))
            else:
                raise ConfigError(f"unknown key {key!r}")
        except (ValueError, StateError) as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    if dims is None:
        raise ConfigError("state file has no 'dims' line")
    if not blocks:
        raise ConfigError("state file has no components")
    comps = []
    for weight, terms in blocks:
        try:
            comps.append((weight, make_pure_sparse(terms, dims)))
        except StateError as exc:
            raise ConfigError(str(exc)) from exc
    return StateFile(dims, noise, tuple(comps))
