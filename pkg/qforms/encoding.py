import json
from fractions import Fraction
from typing import Any, Union

import numpy as np

from qforms.quasimodular import QMPoly
from qforms.series import QSeries, format_fraction


class QFormsEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, Fraction):
            return format_fraction(obj)
        elif hasattr(obj, "to_json"):
            return obj.to_json()
        elif isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.ndarray):
            return obj.tolist()
        return super().default(obj)


def dumps(obj: Any) -> str:
    return json.dumps(obj, cls=QFormsEncoder, indent=2) + "\n"


def parse_document(data: Any) -> Union[QSeries, QMPoly]:
    """A series document has 'coeffs'; a polynomial document has 'terms'."""
    if not isinstance(data, dict):
        raise ValueError("input document must be a JSON object")
    if "coeffs" in data:
        return QSeries.from_json(data)
    if "terms" in data:
        return QMPoly.from_json(data)
    raise ValueError("input document is neither a series ('coeffs') nor a polynomial ('terms')")


def load_document(path: str) -> Union[QSeries, QMPoly]:
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path} is not valid JSON: {e}")
    return parse_document(data)
