"""Python access to the JMGT simulator core."""

from ._jmgt import (
    CheckpointError,
    ConfigError,
    ParamError,
    Params,
    RunSpec,
    laplacian,
    load_config,
    make_params,
    measure_mode_rate,
    mode_spectral_rate,
    parse_config,
    radial_integral,
    read_checkpoint,
    run_command,
    simulate,
    symbol_decay,
)

__all__ = [
    "CheckpointError",
    "ConfigError",
    "ParamError",
    "Params",
    "RunSpec",
    "config_from_dict",
    "laplacian",
    "load_config",
    "make_params",
    "measure_mode_rate",
    "mode_spectral_rate",
    "parse_config",
    "radial_integral",
    "read_checkpoint",
    "run_command",
    "simulate",
    "symbol_decay",
]


def config_from_dict(sections):
    """Build a RunSpec from {section: {key: value}}."""
    lines = []
    for name, body in sections.items():
        lines.append(f"[{name}]")
        for key, value in body.items():
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{key} = {value}")
        lines.append("")
    return parse_config("\n".join(lines))
