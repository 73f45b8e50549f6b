"""Dense tensors with named axes and generalized contraction.

A :class:`LabeledTensor` is an immutable wrapper around a row-major float64
array where every axis carries a string label. All alignment between tensors
is done by label, never by position, and there is no broadcasting: a shared
label must have the same extent on both sides or the operation fails. This
keeps the six-axis linear maps used elsewhere in the package honest about
their shapes.

:func:`contract` is Einstein summation by label: any label not requested in
the output is summed out.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = ["LabeledTensor", "contract", "reshape_fold", "reshape_unfold", "elementwise"]

_EINSUM_LETTERS = string.ascii_lowercase + string.ascii_uppercase


@dataclass(frozen=True)
class LabeledTensor:
    """Immutable dense tensor with uniquely labeled axes.

    ``axes`` is an ordered tuple of ``(label, extent)`` pairs and ``data`` is
    the row-major float64 array shaped to those extents. The array is frozen
    (non-writeable) on construction so instances can be shared freely across
    threads.
    """

    axes: tuple[tuple[str, int], ...]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        axes = tuple((str(label), int(extent)) for label, extent in self.axes)
        labels = [label for label, _ in axes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate axis labels: {labels}")
        for label, extent in axes:
            if extent < 1:
                raise ValueError(f"axis {label!r} has extent {extent}, must be >= 1")
        shape = tuple(extent for _, extent in axes)
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.size != int(np.prod(shape, dtype=np.int64)):
            raise ValueError(
                f"data has {data.size} entries, axes {axes} require {int(np.prod(shape))}"
            )
        data = data.reshape(shape)
        data.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, array, labels: Sequence[str]) -> "LabeledTensor":
        """Wrap ``array`` (anything numpy accepts), one label per axis."""
        array = np.asarray(array, dtype=np.float64)
        if array.ndim != len(labels):
            raise ValueError(f"{array.ndim} array axes but {len(labels)} labels")
        return cls(tuple(zip(labels, array.shape)), array)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(extent for _, extent in self.axes)

    def extent(self, label: str) -> int:
        for axis_label, extent in self.axes:
            if axis_label == label:
                return extent
        raise KeyError(f"no axis labeled {label!r}")

    def item(self) -> float:
        """Value of a zero-axis (scalar) tensor."""
        if self.axes:
            raise ValueError(f"tensor has axes {self.labels}, not a scalar")
        return float(self.data)

    def transpose(self, labels: Sequence[str]) -> "LabeledTensor":
        """Reorder axes to ``labels`` (a permutation of the current labels)."""
        if sorted(labels) != sorted(self.labels):
            raise ValueError(f"{tuple(labels)} is not a permutation of {self.labels}")
        perm = [self.labels.index(label) for label in labels]
        return LabeledTensor.from_array(np.transpose(self.data, perm), labels)

    def rename(self, mapping: dict[str, str]) -> "LabeledTensor":
        """Relabel axes; extents and data unchanged."""
        new_labels = [mapping.get(label, label) for label in self.labels]
        return LabeledTensor.from_array(self.data, new_labels)


def _letter_map(labels: Iterable[str]) -> dict[str, str]:
    table = {}
    for label in labels:
        if label not in table:
            if len(table) >= len(_EINSUM_LETTERS):
                raise ValueError("too many distinct axis labels for contraction")
            table[label] = _EINSUM_LETTERS[len(table)]
    return table


def contract(a: LabeledTensor, b: LabeledTensor, output_axes: Sequence[str]) -> LabeledTensor:
    """Multiply ``a`` and ``b`` and sum over every label absent from ``output_axes``.

    Labels shared by both inputs must have equal extents; they are aligned
    (not broadcast) and summed out unless explicitly kept in ``output_axes``.
    The result's axis order follows ``output_axes``.
    """
    output_axes = list(output_axes)
    if len(set(output_axes)) != len(output_axes):
        raise ValueError(f"duplicate labels in output_axes: {output_axes}")
    known = dict(a.axes)
    for label, extent in b.axes:
        if label in known and known[label] != extent:
            raise ValueError(
                f"shared axis {label!r} has extent {known[label]} in one input "
                f"and {extent} in the other"
            )
        known.setdefault(label, extent)
    for label in output_axes:
        if label not in known:
            raise ValueError(f"output axis {label!r} appears in neither input")

    letters = _letter_map(list(a.labels) + list(b.labels))
    spec = "{},{}->{}".format(
        "".join(letters[l] for l in a.labels),
        "".join(letters[l] for l in b.labels),
        "".join(letters[l] for l in output_axes),
    )
    result = np.einsum(spec, a.data, b.data, optimize=True)
    return LabeledTensor(tuple((l, known[l]) for l in output_axes), np.asarray(result))


def reshape_fold(t: LabeledTensor, fold: Sequence[tuple[str, Sequence[str]]]) -> LabeledTensor:
    """Merge runs of contiguous axes into single axes; the data buffer is untouched.

    ``fold`` lists ``(new_label, old_labels)`` pairs. Each ``old_labels`` run
    must appear contiguously and in order in ``t``; its extents multiply into
    the new axis. Axes not mentioned are kept as they are.
    """
    labels = list(t.labels)
    groups = {}
    for new_label, old_labels in fold:
        old_labels = list(old_labels)
        if not old_labels:
            raise ValueError(f"fold group {new_label!r} is empty")
        try:
            start = labels.index(old_labels[0])
        except ValueError:
            raise ValueError(f"axis {old_labels[0]!r} not present") from None
        if labels[start : start + len(old_labels)] != old_labels:
            raise ValueError(
                f"axes {old_labels} are not contiguous in {tuple(labels)}"
            )
        groups[start] = (new_label, len(old_labels))

    new_axes = []
    i = 0
    while i < len(labels):
        if i in groups:
            new_label, count = groups[i]
            extent = 1
            for _, old_extent in t.axes[i : i + count]:
                extent *= old_extent
            new_axes.append((new_label, extent))
            i += count
        else:
            new_axes.append(t.axes[i])
            i += 1
    seen = [label for label, _ in new_axes]
    if len(set(seen)) != len(seen):
        raise ValueError(f"folded labels collide: {seen}")
    return LabeledTensor(tuple(new_axes), t.data.reshape([e for _, e in new_axes]))


def reshape_unfold(
    t: LabeledTensor, unfold: Sequence[tuple[str, Sequence[tuple[str, int]]]]
) -> LabeledTensor:
    """Inverse of :func:`reshape_fold`: split axes back into labeled factors."""
    splits = {label: list(parts) for label, parts in unfold}
    new_axes = []
    for label, extent in t.axes:
        if label in splits:
            parts = splits.pop(label)
            total = 1
            for _, part_extent in parts:
                total *= part_extent
            if total != extent:
                raise ValueError(
                    f"axis {label!r} has extent {extent}, split asks for {total}"
                )
            new_axes.extend(parts)
        else:
            new_axes.append((label, extent))
    if splits:
        raise ValueError(f"axes not present: {sorted(splits)}")
    return LabeledTensor(tuple(new_axes), t.data.reshape([e for _, e in new_axes]))


def elementwise(t: LabeledTensor, u: LabeledTensor, op: str) -> LabeledTensor:
    """Pointwise ``add``/``sub``/``mul`` of two tensors with identical axes."""
    if t.axes != u.axes:
        raise ValueError(f"axis mismatch: {t.axes} vs {u.axes}")
    if op == "add":
        data = t.data + u.data
    elif op == "sub":
        data = t.data - u.data
    elif op == "mul":
        data = t.data * u.data
    else:
        raise ValueError(f"unknown op {op!r}, expected add/sub/mul")
    return LabeledTensor(t.axes, data)
