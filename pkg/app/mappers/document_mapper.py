# app/mappers/document_mapper.py
from __future__ import annotations

import logging
from typing import Any, Dict

from pydantic import ValidationError

from app.errors import ConfigError
from app.models.documents import CostDocument, PotentialDocument
from app.models.enums import Scale
from app.models.potential import LocallyConstantPotential
from app.models.symbolic import Alphabet
from app.models.transport import CostPair

log = logging.getLogger(__name__)


def is_cost_document(document: Dict[str, Any]) -> bool:
    """Документ стоимости узнаём по наличию 'C1'."""
    return "C1" in document


def _validate(model, document: Dict[str, Any], what: str):
    try:
        return model.model_validate(document)
    except ValidationError as e:
        raise ConfigError(f"Некорректный документ {what}: {e}") from e


def document_to_potential(document: Dict[str, Any]) -> LocallyConstantPotential:
    doc: PotentialDocument = _validate(PotentialDocument, document, "потенциала")
    if doc.matrix is not None:
        potential = LocallyConstantPotential.from_exp_matrix(doc.matrix)
    else:
        potential = LocallyConstantPotential.from_mapping(Alphabet(doc.alphabet), doc.table, doc.scale)
    log.info("Потенциал: d=%d, глубина %d", potential.alphabet.d, potential.depth)
    return potential


def document_to_costs(document: Dict[str, Any]) -> CostPair:
    doc: CostDocument = _validate(CostDocument, document, "стоимости")
    if doc.scale == Scale.LOG:
        costs = CostPair.from_log(doc.C1, doc.C2, doc.p)
    else:
        costs = CostPair(doc.C1, doc.C2, doc.p)
    log.info("Стоимость: C1=%s, C2=%s, p=%g", costs.c1.tolist(), costs.c2.tolist(), costs.p)
    return costs
