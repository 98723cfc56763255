"""
Run manifest repository.
"""

from pathlib import Path

from ..schemas.report import RunManifest
from .base import BaseRepository, PathLike


def manifest_path_for(output: PathLike) -> Path:
    """`<output>.manifest.json` next to the artifact."""
    output = Path(output)
    return output.with_name(output.name + ".manifest.json")


class ManifestRepository(BaseRepository[RunManifest]):
    def __init__(self):
        super().__init__(RunManifest)

    def save_for(self, output: PathLike, manifest: RunManifest) -> Path:
        return self.write(manifest_path_for(output), manifest)
