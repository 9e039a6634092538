"""Command generation from usecase and DTO introspection.

Reads Pydantic model fields from request DTOs and produces Click
commands mechanically. Each DTO field becomes a CLI --option with
required/optional status, default and help text derived from field
metadata. Values reach the DTO as strings; Pydantic coerces them.

Failures leave the process with the error's exit code and a one-line
JSON object on stderr, so batch drivers can parse them.

See docs/dev/cli-command-generation.md for the full convention reference.
"""

from __future__ import annotations

import enum
import json
import logging
from typing import IO, Any, Callable

import click
from pydantic import BaseModel, ValidationError
from pydantic.fields import FieldInfo

from latticeway.exceptions import ConfigError, DomainError

logger = logging.getLogger(__name__)

INTERNAL_EXIT_CODE = 4


class StructuredError(click.ClickException):
    """A click exception that prints {"error", "message"} JSON on stderr."""

    def __init__(self, error: str, message: str, exit_code: int) -> None:
        super().__init__(message)
        self.error = error
        self.exit_code = exit_code

    def show(self, file: IO[Any] | None = None) -> None:
        payload = {"error": self.error, "message": self.message}
        click.echo(json.dumps(payload, ensure_ascii=False), err=True, file=file)

    @classmethod
    def from_domain(cls, e: DomainError) -> StructuredError:
        return cls(type(e).__name__, str(e), e.exit_code)


def describe_validation_error(e: ValidationError) -> str:
    """Flatten pydantic errors to "loc: msg; loc: msg"."""
    parts = []
    for err in e.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def _extra_dict(field_info: FieldInfo) -> dict[str, Any]:
    """Return json_schema_extra as a dict, or empty dict."""
    extra = field_info.json_schema_extra
    return extra if isinstance(extra, dict) else {}


def _click_type(field_info: FieldInfo) -> click.ParamType | None:
    """Derive a Click parameter type from Pydantic field metadata.

    Returns click.Choice for fields annotated with choices in
    json_schema_extra, or None to use Click's default string type.
    """
    extra = _extra_dict(field_info)
    choices = extra.get("choices")
    if choices is not None:
        if isinstance(choices, type) and issubclass(choices, enum.Enum):
            return click.Choice([m.value for m in choices])
        if isinstance(choices, (list, tuple)):
            return click.Choice(list(choices))
    return None


def generate_command(
    name: str,
    request_model: type[BaseModel],
    usecase_attr: str,
    format_output: Callable[[Any, Any], None],
    help_text: str | None = None,
) -> click.Command:
    """Generate a Click command from a Pydantic request model.

    Inspects request_model.model_fields to produce --options.
    The generated command constructs the DTO, retrieves the
    usecase from the DI container via Click's context chain,
    executes, and hands response and request to the formatter.

    Parameters
    ----------
    name:
        Click command name (e.g. "simulate").
    request_model:
        Pydantic model class for the request DTO.
    usecase_attr:
        Attribute name on the DI Container.
    format_output:
        Callback receiving (response, request); writes the artifact.
    help_text:
        Override for --help text. Defaults to request_model's
        class docstring when not provided.
    """
    params: list[click.Parameter] = []
    # Maps Click param name -> DTO field name when they differ.
    name_map: dict[str, str] = {}

    for field_name, field_info in request_model.model_fields.items():
        required = field_info.is_required()
        extra = _extra_dict(field_info)

        cli_name = extra.get("cli_name", field_name)
        option_name = f"--{cli_name.replace('_', '-')}"

        if cli_name != field_name:
            click_param = cli_name.replace("-", "_")
            name_map[click_param] = field_name

        kwargs: dict[str, Any] = {
            "help": field_info.description or "",
            "required": required,
        }
        if not required:
            default = field_info.default
            kwargs["default"] = default.value if isinstance(default, enum.Enum) else default
        param_type = _click_type(field_info)
        if param_type is not None:
            kwargs["type"] = param_type

        params.append(click.Option([option_name], **kwargs))

    def callback(**kwargs: Any) -> None:
        di = click.get_current_context().obj
        usecase = getattr(di, usecase_attr)

        # Remap CLI param names to DTO field names.
        for click_param, dto_field in name_map.items():
            if click_param in kwargs:
                kwargs[dto_field] = kwargs.pop(click_param)

        try:
            request = request_model(**kwargs)
        except ValidationError as e:
            raise StructuredError.from_domain(
                ConfigError(describe_validation_error(e))
            ) from e
        try:
            resp = usecase.execute(request)
            format_output(resp, request)
        except DomainError as e:
            raise StructuredError.from_domain(e) from e
        except click.ClickException:
            raise
        except Exception as e:
            logger.debug("unhandled error in %s", name, exc_info=True)
            raise StructuredError(type(e).__name__, str(e), INTERNAL_EXIT_CODE) from e

    return click.Command(
        name=name,
        params=params,
        callback=callback,
        help=help_text or request_model.__doc__,
    )
