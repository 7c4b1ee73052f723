# -*- coding: utf-8 -*-

app_name = "pwlcycle"
app_title = "PWL Cycle"
app_publisher = "NDV"
app_description = "Limit cycles of planar piecewise linear sewing systems"
app_email = "ndvadalia1@gmail.com"
app_license = "MIT"

# Commands
# --------
# Sub-command name -> dotted path of the handler. Every handler takes the
# parsed argparse namespace and returns the process exit code.

commands = {
    "analyze": "pwlcycle.cli.cmd_analyze",
    "halfmap": "pwlcycle.cli.cmd_halfmap",
    "trajectory": "pwlcycle.cli.cmd_trajectory",
    "sweep": "pwlcycle.cli.cmd_sweep",
}

# Reports
# -------
# CSV outputs, built by script reports returning (columns, data).

reports = {
    "halfmap": "pwlcycle.report.halfmap_table.halfmap_table.execute",
    "trajectory": "pwlcycle.report.trajectory_table.trajectory_table.execute",
    "sweep": "pwlcycle.report.sweep_verdicts.sweep_verdicts.execute",
}
