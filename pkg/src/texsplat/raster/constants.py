"""Compositing constants shared by the tiled renderer and the naive oracle."""

ALPHA_CULL = 1.0 / 255.0  # contributions with o*G below this are skipped
ALPHA_MAX = 0.9999  # keeps transmittance strictly positive for gradients
T_STOP = 1e-4  # front-to-back compositing stops once T falls below this
DENOM_EPS = 1e-9  # ray treated as parallel to the splat plane below this
LOWPASS_SIGMA_PX = 0.3  # screen-space anti-alias floor (std dev, pixels)
TILE = 16
