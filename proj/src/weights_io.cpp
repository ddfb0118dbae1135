#include "comrl/mlp.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace comrl {

namespace {

constexpr char kMagic[8] = {'C', 'M', 'R', 'L', 'W', '0', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

void put_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}

uint32_t get_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

}  // namespace

void save_weights(const std::string& path, std::span<const NamedTensor> tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  COMRL_REQUIRE(os.good(), "cannot open weights file for writing: " + path);
  os.write(kMagic, 8);
  for (const NamedTensor& nt : tensors) {
    put_u32(os, static_cast<uint32_t>(nt.name.size()));
    os.write(nt.name.data(), static_cast<std::streamsize>(nt.name.size()));
    put_u32(os, static_cast<uint32_t>(nt.t.rank()));
    for (int e : nt.t.shape()) put_u32(os, static_cast<uint32_t>(e));
    os.write(reinterpret_cast<const char*>(nt.t.data()),
             static_cast<std::streamsize>(nt.t.numel() * 8));
  }
  COMRL_CHECK(os.good(), "weights write failed: " + path);
}

std::vector<NamedTensor> load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  COMRL_REQUIRE(is.good(), "cannot open weights file: " + path);
  char magic[8];
  is.read(magic, 8);
  COMRL_REQUIRE(is.good() && std::memcmp(magic, kMagic, 8) == 0,
                "bad weights file magic: " + path);
  std::vector<NamedTensor> out;
  while (true) {
    const uint32_t name_len = get_u32(is);
    if (is.eof()) break;
    COMRL_REQUIRE(is.good() && name_len < (1u << 20), "corrupt weights file: " + path);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const uint32_t rank = get_u32(is);
    COMRL_REQUIRE(is.good() && rank <= 8, "corrupt weights file: " + path);
    std::vector<int> shape(rank);
    for (uint32_t i = 0; i < rank; ++i) shape[i] = static_cast<int>(get_u32(is));
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * 8));
    COMRL_REQUIRE(is.good(), "truncated weights file: " + path);
    out.push_back({std::move(name), std::move(t)});
  }
  return out;
}

}  // namespace comrl
