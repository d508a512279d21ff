#include "skelact/matfile.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "skelact/error.hpp"

namespace skelact {
namespace {

enum : std::uint32_t {
  miINT8 = 1,
  miUINT8 = 2,
  miINT16 = 3,
  miUINT16 = 4,
  miINT32 = 5,
  miUINT32 = 6,
  miSINGLE = 7,
  miDOUBLE = 9,
  miINT64 = 12,
  miUINT64 = 13,
  miMATRIX = 14,
  miCOMPRESSED = 15,
};

constexpr std::uint8_t kDoubleClass = 6;
constexpr std::uint8_t kFirstNumericClass = 6;
constexpr std::uint8_t kLastNumericClass = 15;

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::kUnrecognizedLayout, "MAT file: " + what);
}

template <typename T>
T load(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

struct Element {
  std::uint32_t type = 0;
  const unsigned char* data = nullptr;
  std::size_t size = 0;
};

class Reader {
 public:
  Reader(const unsigned char* begin, std::size_t size) : p_(begin), end_(begin + size) {}

  bool done() const { return p_ >= end_; }

  Element next() {
    if (end_ - p_ < 8) corrupt("truncated tag");
    const auto word = load<std::uint32_t>(p_);
    Element e;
    if (word >> 16) {  // small data element: type and size share one word
      e.type = word & 0xffff;
      e.size = word >> 16;
      if (e.size > 4) corrupt("bad small element");
      e.data = p_ + 4;
      p_ += 8;
      return e;
    }
    e.type = word;
    e.size = load<std::uint32_t>(p_ + 4);
    if (static_cast<std::size_t>(end_ - p_ - 8) < e.size) corrupt("truncated element");
    e.data = p_ + 8;
    std::size_t advance = 8 + e.size;
    if (e.type != miCOMPRESSED) advance = (advance + 7) & ~std::size_t{7};
    p_ = std::min(end_, p_ + advance);
    return e;
  }

 private:
  const unsigned char* p_;
  const unsigned char* end_;
};

std::size_t type_size(std::uint32_t type) {
  switch (type) {
    case miINT8: case miUINT8: return 1;
    case miINT16: case miUINT16: return 2;
    case miINT32: case miUINT32: case miSINGLE: return 4;
    case miDOUBLE: case miINT64: case miUINT64: return 8;
    default: return 0;
  }
}

double value_at(const Element& e, std::size_t i) {
  const unsigned char* p = e.data + i * type_size(e.type);
  switch (e.type) {
    case miINT8: return load<std::int8_t>(p);
    case miUINT8: return load<std::uint8_t>(p);
    case miINT16: return load<std::int16_t>(p);
    case miUINT16: return load<std::uint16_t>(p);
    case miINT32: return load<std::int32_t>(p);
    case miUINT32: return load<std::uint32_t>(p);
    case miSINGLE: return load<float>(p);
    case miDOUBLE: return load<double>(p);
    case miINT64: return static_cast<double>(load<std::int64_t>(p));
    case miUINT64: return static_cast<double>(load<std::uint64_t>(p));
    default: corrupt("unsupported numeric type " + std::to_string(e.type));
  }
}

std::vector<unsigned char> inflate_all(const unsigned char* data, std::size_t size) {
  std::vector<unsigned char> out;
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) corrupt("zlib init failed");
  zs.next_in = const_cast<unsigned char*>(data);
  zs.avail_in = static_cast<uInt>(size);
  unsigned char buf[1 << 15];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = buf;
    zs.avail_out = sizeof buf;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      corrupt("bad compressed element");
    }
    out.insert(out.end(), buf, buf + (sizeof buf - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) break;
  }
  inflateEnd(&zs);
  return out;
}

void read_matrix(const Element& m, std::map<std::string, MatArray>& vars) {
  Reader r(m.data, m.size);
  if (r.done()) return;  // empty matrix element
  const Element flags = r.next();
  if (flags.type != miUINT32 || flags.size < 8) corrupt("bad array flags");
  const auto flag_word = load<std::uint32_t>(flags.data);
  const std::uint8_t cls = flag_word & 0xff;
  const bool complex = (flag_word >> 11) & 1;
  if (cls < kFirstNumericClass || cls > kLastNumericClass || complex) return;

  const Element dims = r.next();
  if (dims.type != miINT32) corrupt("bad dimensions");
  MatArray arr;
  std::size_t numel = 1;
  for (std::size_t i = 0; i < dims.size / 4; ++i) {
    const auto d = load<std::int32_t>(dims.data + 4 * i);
    if (d < 0) corrupt("negative dimension");
    arr.dims.push_back(static_cast<std::size_t>(d));
    numel *= static_cast<std::size_t>(d);
  }
  const Element name = r.next();
  if (name.type != miINT8) corrupt("bad array name");
  std::string key(reinterpret_cast<const char*>(name.data), name.size);

  const Element real = r.next();
  const std::size_t width = type_size(real.type);
  if (width == 0 || real.size != numel * width) corrupt("bad data for '" + key + "'");
  arr.data.resize(numel);
  for (std::size_t i = 0; i < numel; ++i) arr.data[i] = value_at(real, i);
  vars[key] = std::move(arr);
}

void read_elements(const unsigned char* data, std::size_t size,
                   std::map<std::string, MatArray>& vars) {
  Reader r(data, size);
  while (!r.done()) {
    const Element e = r.next();
    if (e.type == miCOMPRESSED) {
      const auto inner = inflate_all(e.data, e.size);
      read_elements(inner.data(), inner.size(), vars);
    } else if (e.type == miMATRIX) {
      read_matrix(e, vars);
    }
  }
}

void put32(std::vector<unsigned char>& out, std::uint32_t v) {
  const auto* p = reinterpret_cast<const unsigned char*>(&v);
  out.insert(out.end(), p, p + 4);
}

void pad8(std::vector<unsigned char>& out) {
  while (out.size() % 8) out.push_back(0);
}

void put_element(std::vector<unsigned char>& out, std::uint32_t type, const void* data,
                 std::size_t size) {
  put32(out, type);
  put32(out, static_cast<std::uint32_t>(size));
  const auto* p = static_cast<const unsigned char*>(data);
  out.insert(out.end(), p, p + size);
  pad8(out);
}

std::vector<unsigned char> matrix_element(const std::string& name, const MatArray& a) {
  std::vector<unsigned char> body;
  const std::uint32_t flags[2] = {kDoubleClass, 0};
  put_element(body, miUINT32, flags, sizeof flags);
  std::vector<std::int32_t> dims(a.dims.begin(), a.dims.end());
  put_element(body, miINT32, dims.data(), dims.size() * 4);
  put_element(body, miINT8, name.data(), name.size());
  put_element(body, miDOUBLE, a.data.data(), a.data.size() * 8);
  std::vector<unsigned char> out;
  put32(out, miMATRIX);
  put32(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

}  // namespace

std::map<std::string, MatArray> parse_mat(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 128) corrupt("shorter than the header");
  if (bytes[126] != 'I' || bytes[127] != 'M') corrupt("not a little-endian level 5 file");
  std::map<std::string, MatArray> vars;
  read_elements(bytes.data() + 128, bytes.size() - 128, vars);
  return vars;
}

std::map<std::string, MatArray> read_mat_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  return parse_mat(bytes);
}

void write_mat_file(const std::filesystem::path& path, const std::map<std::string, MatArray>& vars,
                    bool compress) {
  std::vector<unsigned char> out(128, ' ');
  const char text[] = "MATLAB 5.0 MAT-file, written by skelact";
  std::memcpy(out.data(), text, sizeof text - 1);
  std::memset(out.data() + 116, 0, 8);
  out[124] = 0x00;
  out[125] = 0x01;
  out[126] = 'I';
  out[127] = 'M';
  for (const auto& [name, arr] : vars) {
    std::size_t numel = 1;
    for (auto d : arr.dims) numel *= d;
    if (numel != arr.data.size()) throw Error(ErrorCode::kShapeMismatch, "dims do not match data for " + name);
    auto element = matrix_element(name, arr);
    if (!compress) {
      out.insert(out.end(), element.begin(), element.end());
      continue;
    }
    uLongf packed_size = compressBound(static_cast<uLong>(element.size()));
    std::vector<unsigned char> packed(packed_size);
    if (compress2(packed.data(), &packed_size, element.data(), static_cast<uLong>(element.size()),
                  Z_DEFAULT_COMPRESSION) != Z_OK) {
      throw Error(ErrorCode::kIoError, "zlib compression failed");
    }
    put32(out, miCOMPRESSED);
    put32(out, static_cast<std::uint32_t>(packed_size));
    out.insert(out.end(), packed.begin(), packed.begin() + static_cast<std::ptrdiff_t>(packed_size));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

}  // namespace skelact
