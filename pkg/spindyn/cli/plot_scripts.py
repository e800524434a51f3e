"""
gnuplot script generation for --plots.

Scripts reference the CSV files written next to them and render to PNG when
run with `gnuplot <script>` inside the output directory. spindyn itself never
renders images.
"""

from typing import Sequence

_PREAMBLE = """set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 1000,600
"""


def entropy_script(title: str, csv_name: str = "entropy.csv") -> str:
    """Linear and von Neumann entropy next to the Sz dispersions."""
    return _PREAMBLE + f"""set output 'entropy.png'
set multiplot layout 2,1 title '{title}'
set xlabel 't'
set ylabel 'entropy'
set yrange [0:1.05]
plot '{csv_name}' using 1:2 with lines title 'delta', \\
     '' using 1:3 with lines title 'delta_N'
set ylabel 'sigma'
set autoscale y
plot '{csv_name}' using 1:4 with lines title 'sigma1', \\
     '' using 1:5 with lines title 'sigma2'
unset multiplot
"""


def trajectory_script(title: str, csv_name: str = "trajectory.csv") -> str:
    """Canonical coordinates of the classical companion and its energy."""
    return _PREAMBLE + f"""set output 'trajectory.png'
set multiplot layout 2,1 title '{title}'
set xlabel 't'
plot '{csv_name}' using 1:2 with lines title 'q1', \\
     '' using 1:3 with lines title 'p1', \\
     '' using 1:4 with lines title 'q2', \\
     '' using 1:5 with lines title 'p2'
set ylabel 'H'
plot '{csv_name}' using 1:6 with lines title 'H'
unset multiplot
"""


def section_script(title: str, csv_names: Sequence[str]) -> str:
    """Section points (q1, p1) of one or more initial conditions in one panel."""
    plots = ", \\\n     ".join(f"'{name}' using 1:2 with points pt 7 ps 0.3 notitle" for name in csv_names)
    return _PREAMBLE + f"""set output 'section.png'
set title '{title}'
set xlabel 'q1'
set ylabel 'p1'
set size ratio -1
plot {plots}
"""


def sweep_script(title: str, csv_name: str = "sweep.csv") -> str:
    """Lyapunov estimates of the regular and chaotic representatives against alpha."""
    return _PREAMBLE + f"""set output 'sweep.png'
set title '{title}'
set xlabel 'alpha'
set ylabel 'lambda'
set logscale y
plot '{csv_name}' using 1:2 with linespoints title 'regular', \\
     '' using 1:3 with linespoints title 'chaotic'
"""
