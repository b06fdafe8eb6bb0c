"""K-contact forms on lens spaces L(p, q): construction and numerical checks
of their Reeb dynamics, volume, curvature and heat-trace coefficients."""

from .contact_form import ContactForm, from_periods, from_triple
from .lens_atlas import ChartPoint, LensParams, make_lens
from .profile import ProfileSpec, default_profile

__all__ = ["ContactForm", "ChartPoint", "LensParams", "ProfileSpec", "default_profile",
           "from_periods", "from_triple", "make_lens"]
__version__ = "0.1.0"
