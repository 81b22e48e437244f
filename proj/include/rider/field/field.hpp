#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rider/common/geometry.hpp"
#include "rider/field/delaunay.hpp"

namespace rider::field {

class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Regular lattice of cell centers, x fastest, then y, then z.
struct ParticleGrid {
  Vec3 origin;   // box min corner
  Vec3 spacing;  // cell size per axis
  std::uint32_t nx = 1, ny = 1, nz = 1;

  static ParticleGrid from_box(const Box& box, std::uint32_t nx, std::uint32_t ny, std::uint32_t nz);

  std::size_t size() const { return std::size_t{nx} * ny * nz; }
  std::size_t index(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
    return (std::size_t{k} * ny + j) * nx + i;
  }
  Vec3 position(std::size_t particle) const;
  Box box() const;

  friend bool operator==(const ParticleGrid&, const ParticleGrid&) = default;
};

enum class Mode : std::uint8_t { delaunay = 0, voronoi = 1 };
enum class Provenance : std::uint8_t { barycentric = 0, nearest_fallback = 1 };

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view text);
std::string_view to_string(Provenance p);

struct ScalarField {
  ParticleGrid grid;
  Mode mode = Mode::delaunay;
  double slice_height = 0.0;
  std::vector<double> values;
  std::vector<Provenance> provenance;
  // Set when delaunay was requested but the sensors could not be triangulated.
  std::optional<std::string> fallback_reason;
};

/// Grid, mode, values and provenance: what the rfld format carries.
bool same_content(const ScalarField& a, const ScalarField& b);

struct SensorSample {
  std::string sensor_id;
  Vec3 position;
  double value = 0.0;
};

/// Index of the sensor closest to p in 3D; ties go to the smaller sensor id.
std::size_t nearest_sensor(const std::vector<SensorSample>& sensors, const Vec3& p);

/// Delaunay mode triangulates the sensors' horizontal positions in the plane
/// z = slice_height. Particles project onto that plane: inside the hull they
/// take the barycentric blend of the containing triangle, outside it the
/// value of the 3D-nearest sensor. Voronoi mode gives every particle its
/// 3D-nearest sensor's value. When the projected sensors cannot be
/// triangulated the field is computed in voronoi mode and the reason kept.
ScalarField interpolate(const ParticleGrid& grid, const std::vector<SensorSample>& sensors, Mode mode,
                        double slice_height = 0.0, unsigned threads = 1);

/// Mean-pools factor x factor x factor blocks. Axes of extent 1 are kept as
/// they are; every other axis must be divisible by factor.
ScalarField downsample(const ScalarField& field, std::uint32_t factor);

/// Level 0 is `field`; each next level is downsampled by `factor` until
/// `levels` are built or the grid stops dividing evenly.
std::vector<ScalarField> build_lod(const ScalarField& field, std::uint32_t factor, std::size_t levels);

/// Header line, then x,y,z,value,provenance per particle in grid order.
void write_csv(std::ostream& out, const ScalarField& field);

/// rfld, little endian: "RFLD", u16 version, u8 mode, u32 nx ny nz,
/// f64 origin xyz, f64 spacing xyz, nx*ny*nz f64 values, nx*ny*nz u8 provenance.
inline constexpr std::size_t kRfldHeaderBytes = 4 + 2 + 1 + 3 * 4 + 3 * 8 + 3 * 8;
inline constexpr std::uint16_t kRfldVersion = 1;

std::string encode_rfld(const ScalarField& field);
ScalarField decode_rfld(std::string_view bytes);

/// Writes through a temporary file and renames, so a failed export leaves no
/// partial file behind.
void export_field(const ScalarField& field, std::string_view format, const std::filesystem::path& file);
ScalarField read_rfld(const std::filesystem::path& file);

}  // namespace rider::field
