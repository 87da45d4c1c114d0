#include "eventcube/sae/checkpoint.hpp"

#include <algorithm>

#include <json.hpp>

#include "byte_io.hpp"
#include "eventcube/error.hpp"
#include "eventcube/sae/features.hpp"

namespace eventcube::sae {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'S', 'A', 'E', 'C'};

json train_config_to_json(const TrainConfig& c) {
  return {{"lambda", c.lambda},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"lr", c.lr},
          {"plateau_factor", c.plateau_factor},
          {"plateau_patience", c.plateau_patience},
          {"early_stop_patience", c.early_stop_patience},
          {"min_delta", c.min_delta},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.lambda = j.value("lambda", c.lambda);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.lr = j.value("lr", c.lr);
  c.plateau_factor = j.value("plateau_factor", c.plateau_factor);
  c.plateau_patience = j.value("plateau_patience", c.plateau_patience);
  c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
  c.min_delta = j.value("min_delta", c.min_delta);
  c.seed = j.value("seed", c.seed);
  return c;
}

void put_floats(eventcube::detail::ByteWriter& w, std::span<const float> xs) {
  for (float x : xs) w.f32(x);
}

void get_floats(eventcube::detail::ByteReader& r, std::span<float> xs) {
  r.need(xs.size() * 4);
  for (float& x : xs) x = r.f32();
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const SaeModel& model, const AdamState<float>* optimizer,
                                            const TrainConfig* train_config) {
  json header;
  header["arch"] = json::parse(arch_to_json(model.arch()));
  header["seed"] = model.seed();
  header["param_count"] = model.parameters().size();
  header["stat_count"] = model.running_stats().size();
  header["train"] = train_config ? train_config_to_json(*train_config) : json(nullptr);
  if (optimizer) {
    header["optimizer"] = {{"kind", "adam"},
                           {"step", optimizer->step},
                           {"beta1", optimizer->beta1},
                           {"beta2", optimizer->beta2},
                           {"epsilon", optimizer->epsilon}};
  } else {
    header["optimizer"] = nullptr;
  }
  const std::string text = header.dump();

  eventcube::detail::ByteWriter w;
  w.bytes(std::string_view(kMagic, 4));
  w.u16(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text);
  put_floats(w, model.parameters());
  put_floats(w, model.running_stats());
  if (optimizer) {
    put_floats(w, optimizer->m);
    put_floats(w, optimizer->v);
  }
  return std::move(w.buffer());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  eventcube::detail::ByteReader r(bytes);
  if (r.remaining() < 4 || r.bytes(4) != std::string_view(kMagic, 4)) {
    throw Error(Errc::BadMagic, "not a checkpoint file");
  }
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion) throw Error(Errc::VersionMismatch, "checkpoint version " + std::to_string(version));
  const std::uint32_t header_len = r.u32();
  json header;
  try {
    header = json::parse(r.bytes(header_len));
  } catch (const json::parse_error& e) {
    throw Error(Errc::TruncatedFile, std::string("checkpoint header: ") + e.what());
  }

  const ArchSpec arch = arch_from_json(header.at("arch").dump());
  SaeModel model(arch, header.value("seed", std::uint64_t{0}));
  const auto param_count = header.value("param_count", std::size_t{0});
  const auto stat_count = header.value("stat_count", std::size_t{0});
  if (param_count != model.parameters().size() || stat_count != model.running_stats().size()) {
    throw Error(Errc::ArchMismatch, "blob sizes disagree with the architecture");
  }
  get_floats(r, model.parameters());
  get_floats(r, model.running_stats());

  Checkpoint ckpt{std::move(model), std::nullopt, std::nullopt};
  if (header.contains("train") && !header["train"].is_null()) {
    ckpt.train_config = train_config_from_json(header["train"]);
  }
  if (header.contains("optimizer") && !header["optimizer"].is_null()) {
    const json& o = header["optimizer"];
    AdamState<float> st(param_count);
    st.step = o.value("step", std::uint64_t{0});
    st.beta1 = o.value("beta1", st.beta1);
    st.beta2 = o.value("beta2", st.beta2);
    st.epsilon = o.value("epsilon", st.epsilon);
    get_floats(r, st.m);
    get_floats(r, st.v);
    ckpt.optimizer = std::move(st);
  }
  if (r.remaining() != 0) throw Error(Errc::ArchMismatch, "trailing bytes after checkpoint blobs");
  return ckpt;
}

void save_checkpoint(const SaeModel& model, const AdamState<float>* optimizer, const TrainConfig* train_config,
                     const std::filesystem::path& path) {
  eventcube::detail::write_file_bytes(path, encode_checkpoint(model, optimizer, train_config));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(eventcube::detail::read_file_bytes(path));
}

void check_tensor_dims(const SaeModel& model, const Tensor& tensor) {
  const auto dims = tensor_dims(tensor);
  const auto& want = model.arch().input_dims;
  if (!std::equal(dims.begin(), dims.end(), want.begin(), want.end())) {
    std::string have;
    for (auto d : dims) have += std::to_string(d) + " ";
    throw Error(Errc::ArchMismatch, "tensor dims " + have + "do not match the model input")
        .with_series(tensor_series_id(tensor));
  }
}

Matrix<float> stack_tensors(std::span<const Tensor> tensors) {
  if (tensors.empty()) return {};
  const auto dims = tensor_dims(tensors.front());
  const auto rows = static_cast<Eigen::Index>(tensor_values(tensors.front()).size());
  Matrix<float> out(rows, static_cast<Eigen::Index>(tensors.size()));
  for (std::size_t j = 0; j < tensors.size(); ++j) {
    if (tensor_dims(tensors[j]) != dims) {
      throw Error(Errc::DimMismatch, "tensor shapes differ within a dataset").with_series(tensor_series_id(tensors[j]));
    }
    const auto values = tensor_values(tensors[j]);
    for (Eigen::Index i = 0; i < rows; ++i) out(i, static_cast<Eigen::Index>(j)) = static_cast<float>(values[static_cast<std::size_t>(i)]);
  }
  return out;
}

LatentVector encode(const SaeModel& model, const Tensor& tensor) {
  check_tensor_dims(model, tensor);
  const Tensor one[] = {tensor};
  const Matrix<float> z = model.encode(stack_tensors(one));
  return {tensor_series_id(tensor), std::vector<float>(z.data(), z.data() + z.size())};
}

std::vector<LatentVector> encode_all(const SaeModel& model, std::span<const Tensor> tensors, std::size_t chunk) {
  std::vector<LatentVector> out;
  out.reserve(tensors.size());
  chunk = std::max<std::size_t>(chunk, 1);
  for (std::size_t start = 0; start < tensors.size(); start += chunk) {
    const auto part = tensors.subspan(start, std::min(chunk, tensors.size() - start));
    for (const auto& t : part) check_tensor_dims(model, t);
    const Matrix<float> z = model.encode(stack_tensors(part));
    for (std::size_t j = 0; j < part.size(); ++j) {
      const auto col = z.col(static_cast<Eigen::Index>(j));
      out.push_back({tensor_series_id(part[j]), std::vector<float>(col.data(), col.data() + col.size())});
    }
  }
  return out;
}

}  // namespace eventcube::sae
