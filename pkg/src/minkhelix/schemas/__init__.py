"""JSON schemas for the CLI outputs."""
import json
from importlib import resources


def load_schema(name):
    """Load ``report`` or ``verify`` schema as a dict."""
    text = resources.files(__name__).joinpath(f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)
