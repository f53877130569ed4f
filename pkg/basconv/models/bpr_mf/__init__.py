from .BPRMF import BPRMF
