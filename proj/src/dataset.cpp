#include "comrl/dataset.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace comrl {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'C', 'M', 'R', 'L', 'D', 'S', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

json task_to_json(const TaskSpec& t) {
  return json{{"task_id", t.task_id},
              {"params", t.params},
              {"horizon", t.horizon},
              {"discount", t.discount}};
}

TaskSpec task_from_json(Family f, const json& j) {
  TaskSpec t;
  t.family = f;
  t.task_id = j.at("task_id").get<int>();
  t.params = j.at("params").get<std::vector<double>>();
  t.horizon = j.at("horizon").get<int>();
  t.discount = j.at("discount").get<double>();
  return t;
}

json ckpt_to_json(const PolicyCheckpoint& c) {
  return json{{"task_id", c.task_id},
              {"tier", tier_name(c.tier)},
              {"noise_scale", c.noise_scale},
              {"seed", c.seed}};
}

PolicyCheckpoint ckpt_from_json(const json& j) {
  PolicyCheckpoint c;
  c.task_id = j.at("task_id").get<int>();
  c.tier = tier_from_name(j.at("tier").get<std::string>());
  c.noise_scale = j.at("noise_scale").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

}  // namespace

const TaskBuffer& OfflineDataset::buffer_of(int task_id) const {
  for (const TaskBuffer& b : buffers) {
    if (b.task_id == task_id) return b;
  }
  throw config_error("no buffer for task " + std::to_string(task_id));
}

const TaskSpec& OfflineDataset::task_of(int task_id) const {
  for (const TaskSpec& t : tasks) {
    if (t.task_id == task_id) return t;
  }
  throw config_error("no task " + std::to_string(task_id));
}

OfflineDataset::Row OfflineDataset::row(int task_id, int64_t index) const {
  const TaskBuffer& b = buffer_of(task_id);
  COMRL_CHECK(index >= 0 && index < b.count, "row index out of range");
  const double* p = b.data.data() + index * row_width();
  return Row{{p, static_cast<size_t>(dim_s)},
             {p + dim_s, static_cast<size_t>(dim_a)},
             {p + dim_s + dim_a + 1, static_cast<size_t>(dim_s)},
             p[dim_s + dim_a]};
}

void OfflineDataset::validate() const {
  COMRL_REQUIRE(dim_s == obs_dim(family) && dim_a == action_dim(family),
                "dataset dims do not match family");
  COMRL_REQUIRE(episode_len >= 1, "dataset episode_len must be positive");
  COMRL_REQUIRE(tasks.size() == buffers.size(), "task/buffer count mismatch");
  for (size_t i = 0; i < tasks.size(); ++i) {
    const TaskBuffer& b = buffers[i];
    COMRL_REQUIRE(b.task_id == tasks[i].task_id, "buffer order mismatch");
    COMRL_REQUIRE(static_cast<int64_t>(b.data.size()) == b.count * row_width(),
                  "buffer length does not match its count");
    COMRL_REQUIRE(b.count % episode_len == 0,
                  "buffer holds a non-integral number of episodes");
  }
  for (const PolicyCheckpoint& c : checkpoints) {
    task_of(c.task_id);  // throws if absent
  }
}

void save_dataset(const OfflineDataset& ds, const std::string& path) {
  ds.validate();
  json header;
  header["family"] = family_name(ds.family);
  header["dim_s"] = ds.dim_s;
  header["dim_a"] = ds.dim_a;
  header["episode_len"] = ds.episode_len;
  header["seed"] = ds.seed;
  json jt = json::array();
  for (const TaskSpec& t : ds.tasks) jt.push_back(task_to_json(t));
  header["tasks"] = std::move(jt);
  json jc = json::array();
  for (const PolicyCheckpoint& c : ds.checkpoints) jc.push_back(ckpt_to_json(c));
  header["checkpoints"] = std::move(jc);
  std::vector<int64_t> counts;
  for (const TaskBuffer& b : ds.buffers) counts.push_back(b.count);
  header["counts"] = counts;

  const std::string hs = header.dump();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  COMRL_REQUIRE(os.good(), "cannot open dataset file for writing: " + path);
  os.write(kMagic, 8);
  const uint32_t hlen = static_cast<uint32_t>(hs.size());
  os.write(reinterpret_cast<const char*>(&hlen), 4);
  os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const TaskBuffer& b : ds.buffers) {
    const uint64_t count = static_cast<uint64_t>(b.count);
    os.write(reinterpret_cast<const char*>(&count), 8);
    os.write(reinterpret_cast<const char*>(b.data.data()),
             static_cast<std::streamsize>(b.data.size() * 8));
  }
  COMRL_CHECK(os.good(), "dataset write failed: " + path);
}

OfflineDataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  COMRL_REQUIRE(is.good(), "cannot open dataset file: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is.good() || std::memcmp(magic, kMagic, 8) != 0) {
    throw config_error("bad dataset magic at offset 0: " + path);
  }
  uint32_t hlen = 0;
  is.read(reinterpret_cast<char*>(&hlen), 4);
  COMRL_REQUIRE(is.good(), "truncated dataset header length at offset 8: " + path);
  std::string hs(hlen, '\0');
  is.read(hs.data(), hlen);
  COMRL_REQUIRE(is.good(), "truncated dataset header at offset 12: " + path);

  json header;
  try {
    header = json::parse(hs);
  } catch (const json::exception& e) {
    throw config_error("dataset header is not valid JSON: " + std::string(e.what()));
  }

  OfflineDataset ds;
  try {
    ds.family = family_from_name(header.at("family").get<std::string>());
    ds.dim_s = header.at("dim_s").get<int>();
    ds.dim_a = header.at("dim_a").get<int>();
    ds.episode_len = header.at("episode_len").get<int>();
    ds.seed = header.at("seed").get<uint64_t>();
    for (const json& j : header.at("tasks")) {
      ds.tasks.push_back(task_from_json(ds.family, j));
    }
    for (const json& j : header.at("checkpoints")) {
      ds.checkpoints.push_back(ckpt_from_json(j));
    }
    const auto counts = header.at("counts").get<std::vector<int64_t>>();
    COMRL_REQUIRE(counts.size() == ds.tasks.size(),
                  "dataset header counts do not match task list");
    int64_t offset = 12 + static_cast<int64_t>(hlen);
    for (size_t i = 0; i < counts.size(); ++i) {
      uint64_t count = 0;
      is.read(reinterpret_cast<char*>(&count), 8);
      COMRL_REQUIRE(is.good(), "truncated dataset at offset " + std::to_string(offset));
      COMRL_REQUIRE(static_cast<int64_t>(count) == counts[i],
                    "dataset count mismatch for task " +
                        std::to_string(ds.tasks[i].task_id) + " at offset " +
                        std::to_string(offset));
      offset += 8;
      TaskBuffer b;
      b.task_id = ds.tasks[i].task_id;
      b.count = static_cast<int64_t>(count);
      b.data.resize(static_cast<size_t>(b.count) * ds.row_width());
      is.read(reinterpret_cast<char*>(b.data.data()),
              static_cast<std::streamsize>(b.data.size() * 8));
      COMRL_REQUIRE(is.good(), "truncated dataset payload at offset " +
                                   std::to_string(offset));
      offset += static_cast<int64_t>(b.data.size()) * 8;
      ds.buffers.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw config_error("dataset header missing field: " + std::string(e.what()));
  }
  ds.validate();
  return ds;
}

ContextSegment sample_context(const OfflineDataset& ds, int task_id, int n,
                              ContextMode mode,
                              const std::optional<PolicyCheckpoint>& ckpt,
                              Rng& rng) {
  COMRL_REQUIRE(n >= 1, "context length must be positive");
  ContextSegment seg;
  seg.task_id = task_id;
  seg.n = n;
  seg.origin = mode;
  const int w = ds.row_width();

  if (mode == ContextMode::IID) {
    const TaskBuffer& b = ds.buffer_of(task_id);
    COMRL_REQUIRE(b.count >= n, "task buffer smaller than requested context");
    int64_t start = 0;
    if (n == b.count) {
      start = 0;  // the whole buffer
    } else {
      COMRL_REQUIRE(n <= ds.episode_len,
                    "context longer than an episode would straddle boundaries");
      const int64_t n_eps = b.count / ds.episode_len;
      const int64_t ep = rng.uniform_int(static_cast<int>(n_eps));
      const int off = rng.uniform_int(ds.episode_len - n + 1);
      start = ep * ds.episode_len + off;
    }
    seg.data.assign(b.data.begin() + start * w, b.data.begin() + (start + n) * w);
    return seg;
  }

  COMRL_REQUIRE(ckpt.has_value(), "OOD context sampling requires a checkpoint");
  const TaskSpec& env_task = ds.task_of(task_id);
  const TaskSpec& ckpt_task = ds.task_of(ckpt->task_id);
  COMRL_REQUIRE(n <= env_task.horizon, "context longer than one rollout");
  const EpisodeRollout ep = rollout_episode(env_task, ckpt_task, *ckpt, rng);
  seg.data.reserve(static_cast<size_t>(n) * w);
  for (int i = 0; i < n; ++i) {
    const Transition& tr = ep.transitions[i];
    seg.data.insert(seg.data.end(), tr.s.begin(), tr.s.end());
    seg.data.insert(seg.data.end(), tr.a.begin(), tr.a.end());
    seg.data.push_back(tr.r);
    seg.data.insert(seg.data.end(), tr.s_next.begin(), tr.s_next.end());
  }
  return seg;
}

std::vector<ContextSegment> ood_contexts_all_checkpoints(const OfflineDataset& ds,
                                                         int task_id, int n,
                                                         Rng& rng) {
  std::vector<ContextSegment> out;
  out.reserve(ds.checkpoints.size());
  for (size_t i = 0; i < ds.checkpoints.size(); ++i) {
    ContextSegment seg =
        sample_context(ds, task_id, n, ContextMode::OOD, ds.checkpoints[i], rng);
    seg.origin_checkpoint = static_cast<int>(i);
    out.push_back(std::move(seg));
  }
  return out;
}

TransitionBatch sample_rl_batch(const OfflineDataset& ds, int task_id,
                                int batch_size, Rng& rng) {
  COMRL_REQUIRE(batch_size >= 1, "batch size must be positive");
  const TaskBuffer& b = ds.buffer_of(task_id);
  COMRL_REQUIRE(b.count > 0, "cannot sample from an empty buffer");
  const int w = ds.row_width();
  TransitionBatch out;
  out.task_id = task_id;
  out.batch_size = batch_size;
  out.data.reserve(static_cast<size_t>(batch_size) * w);
  out.terminal.reserve(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    const int64_t idx = rng.uniform_int(static_cast<int>(b.count));
    const double* p = b.data.data() + idx * w;
    out.data.insert(out.data.end(), p, p + w);
    out.terminal.push_back(idx % ds.episode_len == ds.episode_len - 1 ? 1 : 0);
  }
  return out;
}

Tensor context_matrix(const OfflineDataset& ds, const ContextSegment& seg) {
  return Tensor({seg.n, ds.row_width()}, seg.data);
}

}  // namespace comrl
