import os
import tempfile
from typing import Optional, Type, TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError

from adq.CliIo.FileFormatsModels import BodyFile, MeasureFile, Provenance, ReportFile
from adq.ConvexCore.ConvexCore import ConvexCore
from adq.ConvexCore.ConvexCoreModels import BallBody, Body
from adq.Errors import AdqError, SchemaError
from adq.Logger import Logger
from adq.Solver.SolverModels import DiscreteMeasure, SolveReport

Document = TypeVar("Document", bound=BaseModel)


class FileFormats:
    """JSON documents for measures, bodies and solve reports. Writes are atomic."""

    def __init__(self, logger: Optional[Logger] = None):
        self.core = ConvexCore(logger)
        self.logger = logger

    def load_measure(self, path: str) -> DiscreteMeasure:
        document = self._load(path, MeasureFile)
        try:
            return DiscreteMeasure(
                n=document.n,
                atoms=np.array(document.atoms),
                weights=np.array(document.weights),
                even=document.even,
            )
        except ValidationError as error:
            raise self._schema_error(path, error) from error

    def save_measure(self, path: str, measure: DiscreteMeasure):
        document = MeasureFile(
            n=measure.n,
            even=measure.even,
            atoms=measure.atoms.tolist(),
            weights=measure.weights.tolist(),
        )
        self.write_text(path, document.model_dump_json(indent=2) + "\n")
        if self.logger:
            self.logger.log_file_written("Measure", path)

    def load_body(self, path: str) -> Body:
        document = self._load(path, BodyFile)
        if document.kind == "ball":
            return BallBody(dim=document.n, radius=document.radius)
        try:
            return self.core.build_polytope(document.normals, document.supports)
        except AdqError as error:
            raise SchemaError(f"{path}: {error.message}", field="supports") from error

    def body_document(self, body: Body, provenance: Optional[Provenance] = None) -> BodyFile:
        if isinstance(body, BallBody):
            return BodyFile(kind="ball", n=body.dim, radius=body.radius, provenance=provenance)
        return BodyFile(
            n=body.dim,
            normals=body.normals.tolist(),
            supports=body.supports.tolist(),
            vertices=body.vertices.tolist(),
            provenance=provenance,
        )

    def save_body(self, path: str, body: Body, provenance: Optional[Provenance] = None):
        self.write_text(path, self.body_document(body, provenance).model_dump_json(indent=2) + "\n")
        if self.logger:
            self.logger.log_file_written("Body", path)

    def report_document(self, report: SolveReport, provenance: Optional[Provenance] = None) -> ReportFile:
        fields = report.model_dump(exclude={"polytope"})
        return ReportFile(body=self.body_document(report.polytope, provenance), **fields)

    def save_report(self, path: str, report: SolveReport, provenance: Optional[Provenance] = None):
        self.write_text(path, self.report_document(report, provenance).model_dump_json(indent=2) + "\n")
        if self.logger:
            self.logger.log_file_written("Report", path)

    def load_report(self, path: str) -> ReportFile:
        return self._load(path, ReportFile)

    def _load(self, path: str, schema: Type[Document]) -> Document:
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = f.read()
        except OSError as error:
            raise SchemaError(f"cannot read {path}: {error.strerror}", field="path") from error
        try:
            return schema.model_validate_json(raw)
        except ValidationError as error:
            raise self._schema_error(path, error) from error

    @staticmethod
    def _schema_error(path: str, error: ValidationError) -> SchemaError:
        first = error.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "<document>"
        return SchemaError(f"{path}: {field}: {first['msg']}", field=field)

    @staticmethod
    def write_text(path: str, text: str):
        """Write through a temporary file in the target directory, then rename over the target."""
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", dir=directory, delete=False, suffix=".tmp"
        ) as f:
            temp_path = f.name
            f.write(text)
        try:
            os.replace(temp_path, path)
        except OSError:
            os.remove(temp_path)
            raise
