"""
Centralized constants for the pevade CLI.
"""

APPLICATION_NAME = "pevade"
LOG_ENVIRONMENT_VARIABLE = "PEVADE_LOG"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TRANSPORT = 3

MANIFEST_NAME = "manifest.csv"
MANIFEST_COLUMNS = ["path", "label"]
CAMPAIGN_NAME = "campaign.csv"
CAMPAIGN_COLUMNS = ["sample_id", "step_index", "queries_cum", "best_score", "detected", "payload_bytes"]
CURVE_NAME = "detection_curve.csv"
CURVE_COLUMNS = ["step_index", "detection_rate"]
TRANSFER_NAME = "transfer.csv"
TRANSFER_COLUMNS = ["target_id", "detections_before", "detections_after"]
ADVERSARIAL_DIR = "adversarial"
PROVENANCE_SUFFIX = ".json"
FLOAT_FORMAT = "%.6f"

MAX_TREES = 50
MAX_DEPTH = 3

MARKER = b"\xcc" * 48 + b"PEVADE-MALICE-01"
