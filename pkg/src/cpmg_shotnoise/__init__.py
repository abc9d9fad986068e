"""Photon shot-noise dephasing of a dispersively coupled qubit under CPMG."""
