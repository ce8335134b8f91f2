import pytest

from rallykit.synth import SynthConfig, generate_match
from rallykit.tracks import serialize_track_set

HEADER = (
    "meta frame_count=4000 fps=25.0 width=1280 height=720\n"
    "court x0=300.0 y0=420.0 x1=980.0 y1=420.0 x2=1000.0 y2=470.0 "
    "x3=280.0 y3=470.0 net_x=640.0 table_y_min=410.0 table_y_max=450.0\n"
)


def track_file(*records: str) -> bytes:
    return (HEADER + "\n".join(records) + ("\n" if records else "")).encode()


@pytest.fixture(scope="session")
def clean_match():
    """One zero-noise synthetic game shared by read-only tests."""
    return generate_match(SynthConfig(seed=5, games=1))


@pytest.fixture(scope="session")
def clean_track_bytes(clean_match):
    ts, _ = clean_match
    return serialize_track_set(ts)
