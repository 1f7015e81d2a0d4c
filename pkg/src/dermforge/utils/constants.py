import numpy as np

LOGGER_NAME = "dermforge"

# Diagnosis codes in label-index order (alphabetical)
CLASS_CODES = ("akiec", "bcc", "bkl", "df", "mel", "nv", "vasc")

CLASS_NAMES = {
    "akiec": "Actinic keratoses",
    "bcc": "Basal cell carcinoma",
    "bkl": "Benign keratosis-like lesions",
    "df": "Dermatofibroma",
    "mel": "Melanoma",
    "nv": "Melanocytic nevi",
    "vasc": "Vascular lesions",
}

NUM_CLASSES = len(CLASS_CODES)

METADATA_COLUMNS = ("lesion_id", "image_id", "dx", "dx_type", "age", "sex", "localization")

IMAGE_EXTENSIONS = (".jpg", ".jpeg", ".png", ".bmp", ".tif", ".tiff")

IMAGE_SIZE = 28
IMAGE_CHANNELS = 3
INPUT_SHAPE = (IMAGE_CHANNELS, IMAGE_SIZE, IMAGE_SIZE)

# Precision modes
TRAINING_DTYPE = np.float32
CHECK_DTYPE = np.float64

# Training defaults
DEFAULT_SEED = 1337
DEFAULT_EPOCHS = 50
DEFAULT_BATCH_SIZE = 90
DEFAULT_LEARNING_RATE = 1e-3
DEFAULT_VAL_FRACTION = 0.1

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-7

PLATEAU_DECAY_FACTOR = 10
PLATEAU_PATIENCE = 3
PLATEAU_MIN_DELTA = 1e-4
PLATEAU_MIN_LR = 1e-5

NV_CLASS_WEIGHT = 0.5
PROBABILITY_FLOOR = 1e-7

CONV_DROPOUT_RATE = 0.25
DENSE_DROPOUT_RATE = 0.5
BATCHNORM_MOMENTUM = 0.99
BATCHNORM_EPSILON = 1e-3

# Augmentation defaults
FLIP_PROBABILITY = 0.5
MAX_ROTATION_DEG = 15.0
BRIGHTNESS_DELTA = 0.1
ZOOM_MAX = 0.1

AGE_BIN_YEARS = 5

# Checkpoint file format
CHECKPOINT_MAGIC = b"DFN1"
CHECKPOINT_FORMAT_VERSION = 1

# Finite-difference checking
GRADCHECK_STEP = 1e-5
GRADCHECK_TOLERANCE = 1e-4
GRADCHECK_DENOMINATOR_FLOOR = 1e-5
GRADCHECK_LAYERS = ("conv2d", "maxpool", "batchnorm", "dropout", "dense", "softmax_cce", "model")

# Artifact file names written by `train` / `eval`
BEST_CHECKPOINT_FILE = "best.dfn"
FINAL_CHECKPOINT_FILE = "final.dfn"
HISTORY_FILE = "history.csv"
REPORT_JSON_FILE = "report.json"
REPORT_TEXT_FILE = "report.txt"
ROC_CSV_FILE = "roc.csv"
CURVES_SVG_FILE = "curves.svg"
ROC_SVG_FILE = "roc.svg"

# Keys of the independent random streams derived from the run seed
STREAM_INIT = 0
STREAM_SPLIT = 1
STREAM_SHUFFLE = 2
STREAM_AUGMENT = 3
STREAM_DROPOUT = 4
