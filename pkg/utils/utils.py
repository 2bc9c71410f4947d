import json
from pathlib import Path

from rich.console import Console
from rich.table import Table

# stdout is reserved for artifacts
console = Console(stderr=True)


def log_step(title: str, payload=None, symbol: str = "🟢"):
    console.print(f"[b]{symbol} {title}[/b]")
    if payload:
        console.print(payload)


def log_error(message: str, err: Exception = None):
    console.print(f"[red]❌ {message}[/red]")
    if err:
        console.print(f"[dim]{str(err)}[/dim]")


def _cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, list) and value and all(isinstance(v, list) for v in value):
        # region rows: coefficients then bound
        return "\n".join(" ".join(_cell(x) for x in row) for row in value)
    if isinstance(value, list):
        return ", ".join(_cell(v) for v in value)
    if isinstance(value, dict):
        return "\n".join(f"{k} = {_cell(v)}" for k, v in value.items())
    return str(value)


def log_json_block(title: str, block: dict):
    """Key/value table for a result summary, rendered on stderr."""
    table = Table(title=f"📌 {title}", title_justify="left", show_header=False, border_style="cyan")
    table.add_column(style="bold cyan")
    table.add_column()
    for key, value in block.items():
        table.add_row(key, _cell(value))
    console.print(table)


def dump_json(data) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"


def save_json_log(data, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_json(data))
    return path
