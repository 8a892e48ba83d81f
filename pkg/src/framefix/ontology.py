"""Registry of intents, their domains, and slot metadata.

Every pipeline stage resolves labels against one ontology so that a frame
valid for training is valid everywhere else.  The ontology is loaded from a
versioned JSON document::

    {
      "version": "1",
      "domains": {"PLAY_MUSIC": "music"},
      "slots": {"PLAYLIST_NAME": {"templatable": true, "gazetteer": "PLAYLIST_NAME"}}
    }

Slot entries say whether the slot is open class enough to take part in
template extraction and, if so, which gazetteer supplies candidate values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .frames import Frame, FrameError, Slot


class UnknownLabelError(FrameError):
    """A frame used an intent or slot label the ontology does not define."""


@dataclass(frozen=True)
class SlotSpec:
    templatable: bool = False
    gazetteer: str | None = None


@dataclass(frozen=True)
class Ontology:
    version: str
    domains: dict[str, str]
    slots: dict[str, SlotSpec]

    def domain_of(self, intent_label: str) -> str:
        try:
            return self.domains[intent_label]
        except KeyError:
            raise UnknownLabelError(f"unknown intent label {intent_label}") from None

    def slot_spec(self, slot_label: str) -> SlotSpec:
        try:
            return self.slots[slot_label]
        except KeyError:
            raise UnknownLabelError(f"unknown slot label {slot_label}") from None

    def is_templatable(self, slot_label: str) -> bool:
        return self.slot_spec(slot_label).templatable

    def validate_frame(self, frame: Frame) -> None:
        """Raise UnknownLabelError if any label in the tree is unregistered."""
        self._validate_node(frame)

    def _validate_node(self, node: Union[Frame, Slot]) -> None:
        if isinstance(node, Frame):
            if node.label not in self.domains:
                raise UnknownLabelError(f"unknown intent label {node.label}")
        else:
            if node.label not in self.slots:
                raise UnknownLabelError(f"unknown slot label {node.label}")
        for child in node.children:
            if not isinstance(child, str):
                self._validate_node(child)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "domains": dict(self.domains),
            "slots": {
                label: {"templatable": spec.templatable, "gazetteer": spec.gazetteer}
                for label, spec in self.slots.items()
            },
        }


def ontology_from_dict(doc: dict) -> Ontology:
    slots = {}
    for label, entry in doc.get("slots", {}).items():
        slots[label] = SlotSpec(
            templatable=bool(entry.get("templatable", False)),
            gazetteer=entry.get("gazetteer"),
        )
    return Ontology(
        version=str(doc.get("version", "1")),
        domains=dict(doc.get("domains", {})),
        slots=slots,
    )


def load_ontology(path: Union[str, Path]) -> Ontology:
    with open(path, "r", encoding="utf-8") as handle:
        return ontology_from_dict(json.load(handle))


def save_ontology(ontology: Ontology, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(ontology.to_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")
