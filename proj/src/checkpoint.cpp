#include "glp/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "glp/util.hpp"

namespace glp {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian; byte swapping not implemented");

static constexpr char kMagic[8] = {'G', 'L', 'P', 'C', 'K', 'P', 'T', '1'};

void save_checkpoint(const ParamStore& params, const nlohmann::json& hyper,
                     const std::string& path) {
  nlohmann::json manifest;
  manifest["version"] = kCheckpointVersion;
  manifest["hyper"] = hyper;
  nlohmann::json tensors = nlohmann::json::array();
  size_t total = 0;
  for (const auto& name : params.names) {
    const Tensor& t = params.at(name);
    tensors.push_back({{"name", name}, {"rows", t.rows}, {"cols", t.cols}});
    total += t.numel();
  }
  manifest["tensors"] = tensors;
  std::string mjson = manifest.dump();

  std::string out;
  out.reserve(8 + 8 + mjson.size() + total * 8);
  out.append(kMagic, 8);
  uint64_t mlen = mjson.size();
  out.append(reinterpret_cast<const char*>(&mlen), 8);
  out += mjson;
  for (const auto& name : params.names) {
    const Tensor& t = params.at(name);
    out.append(reinterpret_cast<const char*>(t.v.data()), t.v.size() * sizeof(double));
  }
  write_file(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::string data = read_file(path);
  if (data.size() < 16 || std::memcmp(data.data(), kMagic, 8) != 0)
    fail_data("not a checkpoint file: " + path);
  uint64_t mlen;
  std::memcpy(&mlen, data.data() + 8, 8);
  if (16 + mlen > data.size()) fail_data("truncated checkpoint manifest: " + path);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(data.substr(16, mlen));
  } catch (const nlohmann::json::exception& e) {
    fail_data("bad checkpoint manifest in " + path + ": " + e.what());
  }
  if (!manifest.contains("version") || manifest["version"].get<int>() != kCheckpointVersion)
    fail_data("checkpoint version mismatch in " + path);

  Checkpoint ck;
  ck.hyper = manifest.value("hyper", nlohmann::json::object());
  size_t offset = 16 + mlen;
  for (const auto& t : manifest["tensors"]) {
    std::string name = t["name"].get<std::string>();
    int rows = t["rows"].get<int>();
    int cols = t["cols"].get<int>();
    if (rows < 0 || cols < 0) fail_data("bad tensor shape in checkpoint manifest: " + name);
    size_t bytes = static_cast<size_t>(rows) * static_cast<size_t>(cols) * sizeof(double);
    if (offset + bytes > data.size())
      fail_data("truncated checkpoint blob at tensor " + name + " in " + path);
    Tensor tensor(rows, cols);
    std::memcpy(tensor.v.data(), data.data() + offset, bytes);
    offset += bytes;
    ck.params.add(name, std::move(tensor));
  }
  if (offset != data.size()) fail_data("trailing bytes in checkpoint blob: " + path);
  return ck;
}

}  // namespace glp
