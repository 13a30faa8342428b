"""
Simulation tables
=================

Run the shipped experiment configurations with a reduced number of
replications.  The full-size runs take about a minute per table on one core
(``binom-mde simulate`` with the same file gives identical numbers).
"""

import dataclasses
from importlib import resources

from binom_mde.montecarlo import format_report_table, load_config, run_experiment

for name in ("table1.cfg", "table3.cfg"):
    config = load_config(resources.files("binom_mde") / "configs" / name)
    config = dataclasses.replace(config, replications=1000)
    print(name)
    print(format_report_table(run_experiment(config, threads=1)))
