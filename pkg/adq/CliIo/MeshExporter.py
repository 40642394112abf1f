import io
from typing import Optional

import numpy as np

from adq.CliIo.FileFormats import FileFormats
from adq.ConvexCore.ConvexCoreModels import HPolytope
from adq.Errors import BadDims, SchemaError
from adq.Logger import Logger


class MeshExporter:
    """Triangle meshes ("v x y z" then "f i j k", 1-based) for n = 3, vertex CSV for n = 2."""

    def __init__(self, logger: Optional[Logger] = None):
        self.logger = logger

    def triangles(self, P: HPolytope) -> np.ndarray:
        """Fan triangulation of every full facet, counterclockwise seen from outside."""
        if P.dim != 3:
            raise BadDims("triangle meshes need n = 3, export polygons as CSV instead")
        faces = []
        for facet in P.facets:
            if facet.degenerate:
                continue
            cycle = facet.vertex_ids
            for j in range(1, len(cycle) - 1):
                faces.append([cycle[0], cycle[j], cycle[j + 1]])
        return np.array(faces, dtype=int)

    def export_mesh(self, P: HPolytope, path: str):
        faces = self.triangles(P)
        lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in P.vertices.tolist()]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in faces.tolist()]
        FileFormats.write_text(path, "\n".join(lines) + "\n")
        if self.logger:
            self.logger.log_file_written("Mesh", path)

    def read_mesh(self, path: str) -> tuple[np.ndarray, np.ndarray]:
        vertices, faces = [], []
        with open(path, "r", encoding="utf-8") as f:
            for number, line in enumerate(f, start=1):
                parts = line.split()
                if not parts:
                    continue
                try:
                    if parts[0] == "v":
                        vertices.append([float(x) for x in parts[1:4]])
                    elif parts[0] == "f":
                        faces.append([int(i) - 1 for i in parts[1:4]])
                except ValueError as error:
                    raise SchemaError(f"{path}:{number}: {error}", field=f"line {number}") from error
        return np.array(vertices), np.array(faces, dtype=int)

    @staticmethod
    def mesh_volume(vertices: np.ndarray, faces: np.ndarray) -> float:
        """Divergence theorem: Σ det(a, b, c)/6 over outward triangles."""
        a, b, c = vertices[faces[:, 0]], vertices[faces[:, 1]], vertices[faces[:, 2]]
        return float(np.sum(np.einsum("ij,ij->i", a, np.cross(b, c))) / 6.0)

    def polygon_vertices(self, P: HPolytope) -> np.ndarray:
        """Vertices of a polygon in counterclockwise order."""
        if P.dim != 2:
            raise BadDims("polygon export needs n = 2")
        centered = P.vertices - P.vertices.mean(axis=0)
        angles = np.arctan2(centered[:, 1], centered[:, 0])
        return P.vertices[np.argsort(angles)]

    def export_polygon_csv(self, P: HPolytope, path: str):
        self._write_table(path, ["x", "y"], self.polygon_vertices(P))
        if self.logger:
            self.logger.log_file_written("Polygon", path)

    def export_table(self, path: str, header: list[str], rows: np.ndarray):
        self._write_table(path, header, rows)
        if self.logger:
            self.logger.log_file_written("Table", path)

    def _write_table(self, path: str, header: list[str], rows: np.ndarray):
        buffer = io.StringIO()
        np.savetxt(buffer, rows, delimiter=",", header=",".join(header), comments="", fmt="%.17g")
        FileFormats.write_text(path, buffer.getvalue())
