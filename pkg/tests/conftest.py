"""Shared scenario builders for the harness-level tests."""

from modelfree.scenario import parse_scenario_text


def lti_scenario(controller_lines, duration=12.0, h=1e-3, window=50,
                 reference="[[0.5, 0.0], [1.0, 1.0]]", max_slope=2.0,
                 ageing=False, noise_amplitude=0.0, seed=1, extra=""):
    text = f"""
plant.kind = lti
plant.numerator = [1.0, 4.0, 4.0]
plant.denominator = [1.0, 3.0, 3.0, 1.0]
{'plant.aged_denominator = [1.0, 4.5, 6.75, 3.375]' if ageing else ''}
{'plant.ageing_time = 15.0' if ageing else ''}
{controller_lines}
reference.kind = piecewise
reference.breakpoints = {reference}
reference.max_slope = {max_slope}
sim.h = {h}
sim.duration = {duration}
estimator.window_samples = {window}
noise.seed = {seed}
noise.amplitude = {noise_amplitude}
{extra}
"""
    return parse_scenario_text(text)


def buck_scenario(controller_lines, duration=0.02, h=1e-6, window=3,
                  r_schedule="[[0.0, 10.0]]", r_interp="hold",
                  reference="[[0.0, 0.0], [0.002, 12.0]]", max_slope=6000.0,
                  noise_amplitude=0.0, seed=1, extra=""):
    text = f"""
plant.kind = buck
plant.E = 20.0
plant.L = 1e-3
plant.C = 1e-5
plant.R_schedule = {r_schedule}
plant.R_interpolation = {r_interp}
{controller_lines}
reference.kind = ramp
reference.breakpoints = {reference}
reference.max_slope = {max_slope}
sim.h = {h}
sim.duration = {duration}
estimator.window_samples = {window}
noise.seed = {seed}
noise.amplitude = {noise_amplitude}
{extra}
"""
    return parse_scenario_text(text)


IPI_BUCK = """
controller.kind = ipi
controller.alpha0 = 3.0
controller.Kp = 2000.0
controller.Ki = 3e6
"""

IPIS_BUCK = """
controller.kind = ipis
controller.alpha0 = 3.0
controller.Kp = 18000.0
controller.Ki = 2.7e7
controller.nu = 1
controller.K_alpha = 2.0
controller.sign = 1
controller.h_alpha = 0.1
controller.gamma_band = [2.85, 3.15]
"""

PID_LTI = "controller.kind = pid\ncontroller.broida = [4.0, 2.018, 0.2424]"

IPI_LTI = """
controller.kind = ipi
controller.alpha0 = 300.0
controller.Kp = 0.0033
controller.Ki = 0.0
"""
