"""Desk-scale affective human-robot interaction pipeline.

Subsystems:
  wire / ring / transport  -- binary protocol, frame buffering, TCP link
  percept                  -- face selection, cropping, neutral normalization
  context                  -- dialogue history and prompt construction
  nn / vl2e / train        -- multimodal emotion model and its trainer
  empathy                  -- emotion -> expression command mapping
  harness                  -- synthetic sessions, replay, metrics, ablations
"""

__version__ = "0.1.0"
