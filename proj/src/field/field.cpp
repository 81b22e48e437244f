#include "rider/field/field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace rider::field {

ParticleGrid ParticleGrid::from_box(const Box& box, std::uint32_t nx, std::uint32_t ny, std::uint32_t nz) {
  if (!box.well_formed()) throw FieldError("grid box is degenerate");
  if (nx == 0 || ny == 0 || nz == 0) throw FieldError("grid resolution must be positive on every axis");
  ParticleGrid g;
  g.origin = box.min;
  g.spacing = {(box.max.x - box.min.x) / nx, (box.max.y - box.min.y) / ny, (box.max.z - box.min.z) / nz};
  g.nx = nx;
  g.ny = ny;
  g.nz = nz;
  return g;
}

Vec3 ParticleGrid::position(std::size_t particle) const {
  const std::size_t i = particle % nx;
  const std::size_t j = (particle / nx) % ny;
  const std::size_t k = particle / (std::size_t{nx} * ny);
  return {origin.x + (static_cast<double>(i) + 0.5) * spacing.x, origin.y + (static_cast<double>(j) + 0.5) * spacing.y,
          origin.z + (static_cast<double>(k) + 0.5) * spacing.z};
}

Box ParticleGrid::box() const {
  return {origin, {origin.x + spacing.x * nx, origin.y + spacing.y * ny, origin.z + spacing.z * nz}};
}

std::string_view to_string(Mode m) { return m == Mode::delaunay ? "delaunay" : "voronoi"; }

std::optional<Mode> parse_mode(std::string_view text) {
  if (text == "delaunay") return Mode::delaunay;
  if (text == "voronoi") return Mode::voronoi;
  return std::nullopt;
}

std::string_view to_string(Provenance p) {
  return p == Provenance::barycentric ? "barycentric" : "nearest-fallback";
}

bool same_content(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid == b.grid) || a.mode != b.mode || a.provenance != b.provenance) return false;
  if (a.values.size() != b.values.size()) return false;
  // Bitwise, so NaN payloads and signed zeros count.
  return std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0;
}

std::size_t nearest_sensor(const std::vector<SensorSample>& sensors, const Vec3& p) {
  std::size_t best = 0;
  double best_d = distance_squared(sensors[0].position, p);
  for (std::size_t s = 1; s < sensors.size(); ++s) {
    const double d = distance_squared(sensors[s].position, p);
    if (d < best_d || (d == best_d && sensors[s].sensor_id < sensors[best].sensor_id)) {
      best = s;
      best_d = d;
    }
  }
  return best;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

ScalarField interpolate(const ParticleGrid& grid, const std::vector<SensorSample>& sensors, Mode mode,
                        double slice_height, unsigned threads) {
  if (sensors.empty()) throw FieldError("no sensor values to interpolate");
  for (const auto& s : sensors)
    if (!std::isfinite(s.value)) throw FieldError("sensor '" + s.sensor_id + "' has a non-finite value");

  ScalarField f;
  f.grid = grid;
  f.mode = mode;
  f.slice_height = slice_height;
  f.values.assign(grid.size(), 0.0);
  f.provenance.assign(grid.size(), Provenance::nearest_fallback);

  std::optional<Triangulation> tri;
  std::vector<double> vertex_values;
  if (mode == Mode::delaunay) {
    std::vector<Vertex> vs;
    for (const auto& s : sensors) vs.push_back({s.sensor_id, {s.position.x, s.position.y}});
    try {
      tri = build_delaunay(std::move(vs));
      std::map<std::string, double> by_id;
      for (const auto& s : sensors) by_id[s.sensor_id] = s.value;
      for (const auto& v : tri->vertices) vertex_values.push_back(by_id.at(v.id));
    } catch (const std::runtime_error& e) {
      f.mode = Mode::voronoi;
      f.fallback_reason = e.what();
    }
  }

  const std::size_t columns = std::size_t{grid.nx} * grid.ny;
  std::vector<std::optional<Location>> column_hit(tri ? columns : 0);
  if (tri) {
    parallel_for(columns, threads, [&](std::size_t c) {
      const Vec3 p = grid.position(c);
      column_hit[c] = locate(*tri, {p.x, p.y});
    });
  }

  parallel_for(grid.size(), threads, [&](std::size_t particle) {
    const std::size_t c = particle % columns;
    if (tri && column_hit[c]) {
      const auto& loc = *column_hit[c];
      const auto& t = tri->triangles[static_cast<std::size_t>(loc.triangle)];
      double v = 0.0, lo = vertex_values[static_cast<std::size_t>(t[0])], hi = lo;
      for (int k = 0; k < 3; ++k) {
        const double x = vertex_values[static_cast<std::size_t>(t[k])];
        v += loc.weights[k] * x;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      f.values[particle] = std::clamp(v, lo, hi);
      f.provenance[particle] = Provenance::barycentric;
    } else {
      f.values[particle] = sensors[nearest_sensor(sensors, grid.position(particle))].value;
    }
  });
  return f;
}

ScalarField downsample(const ScalarField& field, std::uint32_t factor) {
  if (factor == 0) throw FieldError("downsample factor must be positive");
  const auto& g = field.grid;
  const auto reduce = [&](std::uint32_t n, const char* axis) -> std::uint32_t {
    if (n == 1) return 1;
    if (n % factor != 0)
      throw FieldError(std::string("grid ") + axis + " extent " + std::to_string(n) + " is not divisible by " +
                       std::to_string(factor));
    return n / factor;
  };
  ParticleGrid c = g;
  c.nx = reduce(g.nx, "x");
  c.ny = reduce(g.ny, "y");
  c.nz = reduce(g.nz, "z");
  const std::uint32_t fx = g.nx / c.nx, fy = g.ny / c.ny, fz = g.nz / c.nz;
  c.spacing = {g.spacing.x * fx, g.spacing.y * fy, g.spacing.z * fz};

  ScalarField out;
  out.grid = c;
  out.mode = field.mode;
  out.slice_height = field.slice_height;
  out.fallback_reason = field.fallback_reason;
  out.values.resize(c.size());
  out.provenance.resize(c.size());
  const double count = static_cast<double>(fx) * fy * fz;
  for (std::uint32_t k = 0; k < c.nz; ++k)
    for (std::uint32_t j = 0; j < c.ny; ++j)
      for (std::uint32_t i = 0; i < c.nx; ++i) {
        double sum = 0.0;
        bool all_bary = true;
        for (std::uint32_t dk = 0; dk < fz; ++dk)
          for (std::uint32_t dj = 0; dj < fy; ++dj)
            for (std::uint32_t di = 0; di < fx; ++di) {
              const std::size_t src = g.index(i * fx + di, j * fy + dj, k * fz + dk);
              sum += field.values[src];
              all_bary = all_bary && field.provenance[src] == Provenance::barycentric;
            }
        const std::size_t dst = c.index(i, j, k);
        out.values[dst] = sum / count;
        out.provenance[dst] = all_bary ? Provenance::barycentric : Provenance::nearest_fallback;
      }
  return out;
}

std::vector<ScalarField> build_lod(const ScalarField& field, std::uint32_t factor, std::size_t levels) {
  std::vector<ScalarField> out{field};
  if (factor < 2) return out;
  while (out.size() < levels) {
    const auto& g = out.back().grid;
    const auto ok = [&](std::uint32_t n) { return n == 1 || n % factor == 0; };
    if (!ok(g.nx) || !ok(g.ny) || !ok(g.nz) || g.size() == 1) break;
    out.push_back(downsample(out.back(), factor));
  }
  return out;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ec == std::errc{} ? ptr : buf);
}

template <typename T>
void put(std::string& out, T v) {
  unsigned char bytes[sizeof(T)];
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::string_view in, std::size_t& at) {
  if (at + sizeof(T) > in.size()) throw FieldError("rfld data is truncated");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  at += sizeof(T);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

void write_atomically(const std::filesystem::path& file, const std::string& bytes) {
  const std::filesystem::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FieldError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw FieldError("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw FieldError("cannot move export into " + file.string() + ": " + ec.message());
  }
}

}  // namespace

void write_csv(std::ostream& out, const ScalarField& field) {
  std::string buf = "x,y,z,value,provenance\n";
  for (std::size_t p = 0; p < field.values.size(); ++p) {
    const Vec3 pos = field.grid.position(p);
    append_number(buf, pos.x);
    buf += ',';
    append_number(buf, pos.y);
    buf += ',';
    append_number(buf, pos.z);
    buf += ',';
    append_number(buf, field.values[p]);
    buf += ',';
    buf += to_string(field.provenance[p]);
    buf += '\n';
  }
  out << buf;
}

std::string encode_rfld(const ScalarField& field) {
  const auto& g = field.grid;
  if (field.values.size() != g.size() || field.provenance.size() != g.size())
    throw FieldError("field size does not match its grid");
  std::string out;
  out.reserve(kRfldHeaderBytes + g.size() * 9);
  out += "RFLD";
  put<std::uint16_t>(out, kRfldVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(field.mode));
  put<std::uint32_t>(out, g.nx);
  put<std::uint32_t>(out, g.ny);
  put<std::uint32_t>(out, g.nz);
  for (double v : {g.origin.x, g.origin.y, g.origin.z, g.spacing.x, g.spacing.y, g.spacing.z}) put<double>(out, v);
  for (double v : field.values) put<double>(out, v);
  for (auto p : field.provenance) put<std::uint8_t>(out, static_cast<std::uint8_t>(p));
  return out;
}

ScalarField decode_rfld(std::string_view in) {
  if (in.size() < 4 || in.substr(0, 4) != "RFLD") throw FieldError("not an rfld stream");
  std::size_t at = 4;
  if (get<std::uint16_t>(in, at) != kRfldVersion) throw FieldError("unsupported rfld version");
  const auto mode = get<std::uint8_t>(in, at);
  if (mode > 1) throw FieldError("rfld mode byte out of range");
  ScalarField f;
  f.mode = static_cast<Mode>(mode);
  auto& g = f.grid;
  g.nx = get<std::uint32_t>(in, at);
  g.ny = get<std::uint32_t>(in, at);
  g.nz = get<std::uint32_t>(in, at);
  g.origin = {get<double>(in, at), get<double>(in, at), get<double>(in, at)};
  g.spacing = {get<double>(in, at), get<double>(in, at), get<double>(in, at)};
  const std::size_t n = g.size();
  if (in.size() != kRfldHeaderBytes + n * 9) throw FieldError("rfld length does not match its header");
  f.values.resize(n);
  for (auto& v : f.values) v = get<double>(in, at);
  f.provenance.resize(n);
  for (auto& p : f.provenance) {
    const auto b = get<std::uint8_t>(in, at);
    if (b > 1) throw FieldError("rfld provenance byte out of range");
    p = static_cast<Provenance>(b);
  }
  return f;
}

void export_field(const ScalarField& field, std::string_view format, const std::filesystem::path& file) {
  if (format == "rfld") {
    write_atomically(file, encode_rfld(field));
  } else if (format == "csv") {
    std::ostringstream out;
    write_csv(out, field);
    write_atomically(file, out.str());
  } else {
    throw FieldError("unknown export format '" + std::string(format) + "'");
  }
}

ScalarField read_rfld(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FieldError("cannot open " + file.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_rfld(bytes);
}

}  // namespace rider::field
