#include "sfem/post_io.hpp"

#include <charconv>
#include <fstream>
#include <limits>

#include "sfem/bc_loads.hpp"
#include "sfem/errors.hpp"

namespace sfem {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.precision(17);
  return out;
}

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

void write_vtu(const MeshTopology& mesh, const Eigen::VectorXd& d, const NodalField& field,
               const fs::path& path) {
  const std::size_t nn = mesh.node_count();
  const std::size_t nt = mesh.element_count();
  if (static_cast<std::size_t>(d.size()) != 3 * nn || field.stress.size() != nn) {
    throw ConfigError("write_vtu: field sizes do not match the mesh");
  }
  auto out = open_out(path);
  out << "<?xml version=\"1.0\"?>\n"
      << "<VTKFile type=\"UnstructuredGrid\" version=\"1.0\" byte_order=\"LittleEndian\" header_type=\"UInt64\">\n"
      << "  <UnstructuredGrid>\n"
      << "    <Piece NumberOfPoints=\"" << nn << "\" NumberOfCells=\"" << nt << "\">\n"
      << "      <PointData Vectors=\"displacement\" Scalars=\"von_mises\">\n";

  out << "        <DataArray type=\"Float64\" Name=\"displacement\" NumberOfComponents=\"3\" format=\"ascii\">\n";
  for (std::size_t v = 0; v < nn; ++v) out << "          " << d(3 * v) << ' ' << d(3 * v + 1) << ' ' << d(3 * v + 2) << '\n';
  out << "        </DataArray>\n";

  out << "        <DataArray type=\"Float64\" Name=\"stress\" NumberOfComponents=\"6\" ComponentName0=\"xx\" "
         "ComponentName1=\"yy\" ComponentName2=\"zz\" ComponentName3=\"yz\" ComponentName4=\"xz\" "
         "ComponentName5=\"xy\" format=\"ascii\">\n";
  for (std::size_t v = 0; v < nn; ++v) {
    const Voigt& s = field.stress[v];
    out << "          " << s(0) << ' ' << s(1) << ' ' << s(2) << ' ' << s(3) << ' ' << s(4) << ' ' << s(5) << '\n';
  }
  out << "        </DataArray>\n";

  out << "        <DataArray type=\"Float64\" Name=\"von_mises\" format=\"ascii\">\n";
  for (std::size_t v = 0; v < nn; ++v) out << "          " << field.von_mises[v] << '\n';
  out << "        </DataArray>\n"
      << "      </PointData>\n";

  out << "      <Points>\n"
      << "        <DataArray type=\"Float64\" Name=\"Points\" NumberOfComponents=\"3\" format=\"ascii\">\n";
  for (const Point3& p : mesh.nodes.coords) out << "          " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  out << "        </DataArray>\n"
      << "      </Points>\n";

  out << "      <Cells>\n"
      << "        <DataArray type=\"Int64\" Name=\"connectivity\" format=\"ascii\">\n";
  for (const auto& t : mesh.elements.tets) out << "          " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  out << "        </DataArray>\n"
      << "        <DataArray type=\"Int64\" Name=\"offsets\" format=\"ascii\">\n";
  for (std::size_t t = 0; t < nt; ++t) out << "          " << 4 * (t + 1) << '\n';
  out << "        </DataArray>\n"
      << "        <DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n";
  for (std::size_t t = 0; t < nt; ++t) out << "          10\n";
  out << "        </DataArray>\n"
      << "      </Cells>\n"
      << "    </Piece>\n"
      << "  </UnstructuredGrid>\n"
      << "</VTKFile>\n";
  if (!out) throw IoError(path.string(), "write failed");
}

DeflectionProbe default_probe(const MeshTopology& mesh) {
  const BoundingBox box = bounding_box(mesh.nodes);
  DeflectionProbe probe;
  probe.line_point = (box.lo + box.hi) / 2.0;
  return probe;
}

std::vector<DeflectionSample> sample_deflections(const MeshTopology& mesh, const Eigen::VectorXd& d,
                                                 const std::vector<double>& stations, const DeflectionProbe& probe) {
  if (stations.empty()) throw ConfigError("deflection sampling needs at least one station");
  if (probe.axis < 0 || probe.axis > 2 || probe.component < 0 || probe.component > 2) {
    throw ConfigError("deflection probe axis and component must be 0, 1 or 2");
  }
  const BoundingBox box = bounding_box(mesh.nodes);
  const double tol = selector_tolerance(mesh);
  std::vector<DeflectionSample> out;
  out.reserve(stations.size());
  for (double s : stations) {
    Point3 target = probe.line_point;
    target(probe.axis) = s;
    DeflectionSample sample;
    sample.station = s;
    sample.distance = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < mesh.node_count(); ++v) {
      const double dist = (mesh.nodes.coords[v] - target).norm();
      if (dist < sample.distance) {
        sample.distance = dist;
        sample.node = static_cast<NodeIndex>(v);
      }
    }
    sample.deflection = d(3 * sample.node + probe.component);
    sample.outside = s < box.lo(probe.axis) - tol || s > box.hi(probe.axis) + tol;
    out.push_back(sample);
  }
  return out;
}

void write_deflection_csv(const MeshTopology& mesh, const Eigen::VectorXd& d, const std::vector<double>& stations,
                          const DeflectionProbe& probe, const fs::path& path) {
  const auto samples = sample_deflections(mesh, d, stations, probe);
  auto out = open_out(path);
  out << "station,deflection,node,note\n";
  for (const auto& s : samples) {
    out << shortest(s.station) << ',' << shortest(s.deflection) << ',' << s.node << ',' << (s.outside ? "outside mesh extent" : "")
        << '\n';
  }
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace sfem
