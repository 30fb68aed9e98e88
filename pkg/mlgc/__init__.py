"""Metric-learned graph cut refinement of face detections."""
