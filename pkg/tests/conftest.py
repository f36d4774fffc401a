import math
import xml.etree.ElementTree as ET

import pytest

SVG_NS = "{http://www.w3.org/2000/svg}"


def parse_plot(path):
    """Pull markers, the expected-blocktime step line and axis scaling out of an emitted SVG."""
    root = ET.parse(path).getroot()
    area = root.find(f".//{SVG_NS}g[@id='plot-area']")
    y_axis = root.find(f".//{SVG_NS}g[@id='y-axis']")
    markers = root.findall(f".//{SVG_NS}g[@id='blocktimes']/{SVG_NS}path[@class='marker']")
    line = root.find(f".//{SVG_NS}polyline[@id='expected-blocktime']")
    points = [tuple(float(v) for v in p.split(",")) for p in line.get("points").split()]
    lo, hi = float(area.get("data-y-min-log10")), float(area.get("data-y-max-log10"))
    top, height = float(area.get("data-top")), float(area.get("data-height"))

    def value_at(y):
        return 10 ** (hi - (y - top) / height * (hi - lo))

    return {
        "root": root,
        "markers": markers,
        "points": points,
        "y_scale": y_axis.get("data-scale"),
        "value_at": value_at,
    }


@pytest.fixture
def plot_parser():
    return parse_plot


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
