"""
Vocabulary repository for motif vocabulary JSON files.
"""

from ..models.motif import MotifVocabulary
from ..schemas.report import VocabularyEntry, VocabularyFile
from .base import BaseRepository, PathLike


class VocabularyRepository(BaseRepository[VocabularyFile]):
    """
    Repository for `{version, entries: [{key, id, count}]}` files.
    """

    def __init__(self):
        super().__init__(VocabularyFile)

    def save(self, vocabulary: MotifVocabulary, path: PathLike):
        document = VocabularyFile(
            version=vocabulary.version,
            entries=[
                VocabularyEntry(key=key, id=vocabulary.entries[key], count=vocabulary.counts[key])
                for key in vocabulary.ordered_keys()
            ],
        )
        return self.write(path, document)

    def load(self, path: PathLike) -> MotifVocabulary:
        """
        Rebuild a vocabulary with the file's exact id assignment.

        Raises:
            ArtifactFormatError: If the file is not a valid vocabulary
        """
        document = self.read(path)
        vocabulary = MotifVocabulary(version=document.version)
        for entry in document.entries:
            vocabulary.insert(entry.key, entry.count)
        return vocabulary
