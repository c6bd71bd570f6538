#include "treeformer/checkpoint.hpp"

#include <fstream>
#include <json.hpp>
#include <vector>

namespace treeformer {

namespace {

using nlohmann::json;

constexpr char k_magic[9] = "TTCKPT01";

json config_to_json(const ModelConfig& cfg) {
  return json{{"N", cfg.n_layers},   {"d_model", cfg.d_model},
              {"d_ff", cfg.d_ff},    {"h", cfg.heads},
              {"d_k", cfg.d_k},      {"d_v", cfg.d_v},
              {"p_drop", cfg.p_drop}, {"p_dattn", cfg.p_dattn},
              {"p_dff", cfg.p_dff},  {"p_des", cfg.p_des},
              {"p_det", cfg.p_det},  {"eps_ls", cfg.eps_ls},
              {"src_vocab", cfg.src_vocab}, {"tgt_vocab", cfg.tgt_vocab}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.n_layers = j.at("N").get<int>();
  cfg.d_model = j.at("d_model").get<int>();
  cfg.d_ff = j.at("d_ff").get<int>();
  cfg.heads = j.at("h").get<int>();
  cfg.d_k = j.at("d_k").get<int>();
  cfg.d_v = j.at("d_v").get<int>();
  cfg.p_drop = j.at("p_drop").get<double>();
  cfg.p_dattn = j.at("p_dattn").get<double>();
  cfg.p_dff = j.at("p_dff").get<double>();
  cfg.p_des = j.at("p_des").get<double>();
  cfg.p_det = j.at("p_det").get<double>();
  cfg.eps_ls = j.at("eps_ls").get<double>();
  cfg.src_vocab = j.at("src_vocab").get<int>();
  cfg.tgt_vocab = j.at("tgt_vocab").get<int>();
  return cfg;
}

void append_tensor(std::vector<float>& blob, json& table, const std::string& path,
                   const std::string& role, const Mat<float>& m) {
  table.push_back(json{{"path", path},
                       {"role", role},
                       {"rows", m.rows()},
                       {"cols", m.cols()},
                       {"offset", blob.size()}});
  blob.insert(blob.end(), m.data(), m.data() + m.size());
}

Mat<float> read_tensor(const std::vector<float>& blob, const json& entry) {
  auto rows = entry.at("rows").get<Eigen::Index>();
  auto cols = entry.at("cols").get<Eigen::Index>();
  auto offset = entry.at("offset").get<std::size_t>();
  if (offset + static_cast<std::size_t>(rows * cols) > blob.size())
    fail(ErrorCode::IoError, "checkpoint tensor table overruns data");
  Mat<float> m(rows, cols);
  std::copy(blob.begin() + static_cast<std::ptrdiff_t>(offset),
            blob.begin() + static_cast<std::ptrdiff_t>(offset) +
                static_cast<std::ptrdiff_t>(rows * cols),
            m.data());
  return m;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json header;
  header["format_version"] = Checkpoint::k_format_version;
  header["model"] = config_to_json(ckpt.model);
  header["step"] = ckpt.step;
  header["epoch"] = ckpt.epoch;
  header["batch_index"] = ckpt.batch_index;
  header["rng_state"] = ckpt.rng_state;
  header["adam_t"] = ckpt.adam.t;
  json vocab = json::array();
  for (std::size_t i = 0; i < ckpt.vocab.size(); ++i)
    vocab.push_back(json::array({ckpt.vocab.name(static_cast<TokenId>(i)),
                                 token_kind_name(ckpt.vocab.kind(static_cast<TokenId>(i)))}));
  header["vocab"] = std::move(vocab);

  std::vector<float> blob;
  json table = json::array();
  for (const auto& [name, slot] : ckpt.params)
    append_tensor(blob, table, name, "param", slot.value);
  for (const auto& [name, mo] : ckpt.adam.moments) {
    append_tensor(blob, table, name, "adam_m", mo.m);
    append_tensor(blob, table, name, "adam_v", mo.v);
  }
  header["tensors"] = std::move(table);

  std::string header_text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write checkpoint " + path);
  out.write(k_magic, 8);
  std::uint64_t len = header_text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  out.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size() * sizeof(float)));
  if (!out) fail(ErrorCode::IoError, "short write to checkpoint " + path);

  std::ofstream manifest(path + ".manifest");
  if (manifest) {
    manifest << "format_version " << Checkpoint::k_format_version << "\n"
             << "step " << ckpt.step << "\n";
    for (const auto& entry : header["tensors"])
      manifest << entry["role"].get<std::string>() << ' '
               << entry["path"].get<std::string>() << ' ' << entry["rows"] << 'x'
               << entry["cols"] << "\n";
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open checkpoint " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != std::string(k_magic, 8))
    fail(ErrorCode::IoError, "not a checkpoint file: " + path);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string header_text(len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(len));
  if (!in) fail(ErrorCode::IoError, "truncated checkpoint header");
  json header = json::parse(header_text);
  if (header.at("format_version").get<int>() != Checkpoint::k_format_version)
    fail(ErrorCode::IoError, "unsupported checkpoint format version");

  std::vector<float> blob;
  {
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    if (bytes.size() % sizeof(float) != 0)
      fail(ErrorCode::IoError, "checkpoint data not float-aligned");
    blob.resize(bytes.size() / sizeof(float));
    std::memcpy(blob.data(), bytes.data(), bytes.size());
  }

  Checkpoint ckpt;
  ckpt.model = config_from_json(header.at("model"));
  ckpt.step = header.at("step").get<std::int64_t>();
  ckpt.epoch = header.at("epoch").get<std::int64_t>();
  ckpt.batch_index = header.at("batch_index").get<std::int64_t>();
  ckpt.rng_state = header.at("rng_state").get<std::string>();
  ckpt.adam.t = header.at("adam_t").get<std::int64_t>();
  std::vector<Vocabulary::Entry> entries;
  for (const auto& e : header.at("vocab"))
    entries.push_back({e.at(0).get<std::string>(),
                       token_kind_from_name(e.at(1).get<std::string>())});
  ckpt.vocab = Vocabulary(std::move(entries));

  for (const auto& entry : header.at("tensors")) {
    const std::string role = entry.at("role").get<std::string>();
    const std::string name = entry.at("path").get<std::string>();
    Mat<float> m = read_tensor(blob, entry);
    if (role == "param") {
      ckpt.params.add(name, m.rows(), m.cols()) = std::move(m);
    } else if (role == "adam_m") {
      ckpt.adam.moments[name].m = std::move(m);
    } else if (role == "adam_v") {
      ckpt.adam.moments[name].v = std::move(m);
    } else {
      fail(ErrorCode::IoError, "unknown tensor role " + role);
    }
  }
  return ckpt;
}

}  // namespace treeformer
