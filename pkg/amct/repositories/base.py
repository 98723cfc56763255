"""
Base repository class for schema-validated JSON artifacts.
Implements the Repository pattern for artifact access abstraction.
"""

import json
from pathlib import Path
from typing import Generic, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from ..exceptions import ArtifactFormatError

SchemaType = TypeVar("SchemaType", bound=BaseModel)

PathLike = Union[str, Path]


class BaseRepository(Generic[SchemaType]):
    """
    Base repository class reading and writing one pydantic document per file.

    Subclasses add domain conversions on top of `read` and `write`.
    """

    def __init__(self, schema: Type[SchemaType]):
        """
        Initialize repository with the document schema.

        Args:
            schema: Pydantic model every file must validate against
        """
        self.schema = schema

    def read(self, path: PathLike) -> SchemaType:
        """
        Load and validate a document.

        Args:
            path: JSON file

        Returns:
            SchemaType: Validated document

        Raises:
            ArtifactFormatError: If the file is missing, not JSON, or invalid
        """
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ArtifactFormatError(f"cannot read {self.schema.__name__} from {path}: {e}") from e
        return self.validate(raw, source=str(path))

    def validate(self, raw: object, source: str = "<memory>") -> SchemaType:
        try:
            return self.schema.model_validate(raw)
        except ValidationError as e:
            raise ArtifactFormatError(f"{source} is not a valid {self.schema.__name__}: {e}") from e

    def write(self, path: PathLike, document: SchemaType) -> Path:
        """
        Write a document as indented JSON with a trailing newline.

        Args:
            path: Destination file; parent directories are created

        Returns:
            Path: The written path
        """
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(document.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return target

    def exists(self, path: PathLike) -> bool:
        return Path(path).is_file()
