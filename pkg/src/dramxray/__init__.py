"""Simulated DRAM chips with hidden microarchitecture, and the tools that reverse-engineer them."""

from .device import Device, create_device
from .port import CommandPort, Session
from .profile import DeviceProfile, ProfileError, load_profile, preset, random_profile, save_profile
from .report import InferenceReport

__version__ = "0.1.0"

__all__ = [
    "CommandPort", "Device", "DeviceProfile", "InferenceReport", "ProfileError", "Session",
    "create_device", "load_profile", "preset", "random_profile", "save_profile",
]
