"""metabug: learned bug detection for the MBL mini-language.

Pipeline stages, one subpackage each:

- ``minilang``   MBL frontend (parse, print, resolve)
- ``graph``      interprocedural program dependence graphs and slicing
- ``collectors`` bug-pattern candidate collectors (NPD/AIO/NFE/LEAK/RACE)
- ``synthgen``   synthetic inconsistency-group generator plus MBL interpreter
- ``nn``         minimal autodiff tensor, GRU/LSTM cells, gated graph network
- ``meta``       relational embedding, ranking losses, training, ranking
- ``explain``    feasible-path search and decorated bug traces
- ``cli``        the ``metabug`` command line
"""

__version__ = "0.1.0"
