"""Energies below which entanglement detection, teleportation and CHSH violation remain possible."""
from compton_witness import channel, witness

for name, k in zip(("entanglement", "teleportation", "CHSH"), witness.protocol_thresholds()):
    print(f"{name:>14}: k = {k:.5f}  ({511 * k:.1f} keV), max V^2 = {channel.max_visibility(k) ** 2:.6f}")
