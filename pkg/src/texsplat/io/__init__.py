from .scenefile import load_scene, save_scene, scene_file_size
from .dataset import MultiViewDataset, load_dataset, write_dataset
from .config import parse_config, write_config
from .masks import MaskSet, load_masks
from .images import read_image, write_image, srgb_decode, srgb_encode

__all__ = [
    "MaskSet",
    "MultiViewDataset",
    "load_dataset",
    "load_masks",
    "load_scene",
    "parse_config",
    "read_image",
    "save_scene",
    "scene_file_size",
    "srgb_decode",
    "srgb_encode",
    "write_config",
    "write_dataset",
    "write_image",
]
