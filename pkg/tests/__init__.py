"""Test suite for Media Organizer."""
