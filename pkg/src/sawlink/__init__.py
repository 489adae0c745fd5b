"""Desk-scale simulation toolkit for a phonon quantum channel.

Two superconducting qubits exchange shaped single-phonon wavepackets
through a lossy acoustic line with a long round-trip delay.  The
package models the release/capture dynamics, the delayed-feedback
channel, remote entanglement generation and tomography scoring, plus
the device phenomenology that fixes the channel parameters.
"""

__version__ = "0.1.0"
