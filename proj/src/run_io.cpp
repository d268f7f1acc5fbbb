// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include "attndrop/run_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "attndrop/errors.hpp"

namespace attndrop {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads keys from one JSON object and remembers which were consumed, so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be a JSON object");
  }

  void read(const char* key, std::size_t& out) {
    if (const auto* v = take(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
      out = v->get<std::size_t>();
    }
  }
  void read(const char* key, std::uint64_t& out, std::true_type /*seed*/) {
    if (const auto* v = take(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, double& out) {
    if (const auto* v = take(key)) {
      if (!v->is_number()) throw ConfigError(where(key) + " must be a number");
      out = v->get<double>();
    }
  }
  void read(const char* key, bool& out) {
    if (const auto* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key) + " must be true or false");
      out = v->get<bool>();
    }
  }
  void read(const char* key, std::string& out) {
    if (const auto* v = take(key)) {
      if (!v->is_string()) throw ConfigError(where(key) + " must be a string");
      out = v->get<std::string>();
    }
  }
  template <typename Enum, typename Parse>
  void read_enum(const char* key, Enum& out, Parse parse) {
    std::string s;
    read(key, s);
    if (!s.empty()) {
      try {
        out = parse(s);
      } catch (const ConfigError& e) {
        throw ConfigError(where(key) + ": " + e.what());
      }
    }
  }
  const json* child(const char* key) { return take(key); }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!used_.count(key)) throw ConfigError("unknown config key '" + where(key.c_str()) + "'");
    }
  }

 private:
  const json* take(const char* key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string where() const { return path_.empty() ? "config" : path_; }
  std::string where(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void parse_task(const json& j, SyntheticTask& t) {
  Section s(j, "task");
  s.read_enum("kind", t.kind, task_kind_from_string);
  s.read("vocab", t.vocab);
  s.read("seq_len", t.seq_len);
  s.read("num_classes", t.num_classes);
  s.read("train_size", t.train_size);
  s.read("val_size", t.val_size);
  s.read("seed", t.seed, std::true_type{});
  s.read("label_noise", t.label_noise);
  s.finish();
}

void parse_model(const json& j, ModelConfig& m) {
  Section s(j, "model");
  s.read("layers", m.layers);
  s.read("model_dim", m.model_dim);
  s.read("heads", m.heads);
  s.read("ffn_dim", m.ffn_dim);
  s.read("seed", m.seed, std::true_type{});
  s.finish();
}

void parse_optim(const json& j, OptimConfig& o) {
  Section s(j, "optim");
  s.read("lr", o.lr);
  s.read("weight_decay", o.weight_decay);
  s.read("warmup_fraction", o.warmup_fraction);
  s.read("beta1", o.beta1);
  s.read("beta2", o.beta2);
  s.read("eps", o.eps);
  s.read("epochs", o.epochs);
  s.read("batch_size", o.batch_size);
  s.finish();
}

void parse_drop(const json& j, DropConfig& d) {
  Section s(j, "drop");
  s.read_enum("variant", d.variant, drop_variant_from_string);
  s.read("p", d.p);
  s.read("k", d.k);
  s.read("sigma_max", d.sigma_max);
  s.read("w", d.w);
  s.read("lambda", d.lambda);
  s.read("consistency", d.consistency);
  s.read("seed", d.seed, std::true_type{});
  s.read_enum("blur_mode", d.blur_mode, blur_mode_from_string);
  s.read("kernel_steps", d.kernel_steps);
  s.finish();
}

void parse_eval(const json& j, EvalConfig& e) {
  Section s(j, "eval");
  s.read("ece_bins", e.ece_bins);
  s.read("probe_batches", e.probe_batches);
  s.finish();
}

void parse_output(const json& j, OutputConfig& o) {
  Section s(j, "output");
  s.read("dir", o.dir);
  s.read("name", o.name);
  s.finish();
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["task"] = {{"kind", to_string(c.task.kind)},       {"vocab", c.task.vocab},
               {"seq_len", c.task.seq_len},            {"num_classes", c.task.num_classes},
               {"train_size", c.task.train_size},      {"val_size", c.task.val_size},
               {"seed", c.task.seed},                  {"label_noise", c.task.label_noise}};
  j["model"] = {{"layers", c.model.layers},
                {"model_dim", c.model.model_dim},
                {"heads", c.model.heads},
                {"ffn_dim", c.model.ffn_dim},
                {"seed", c.model.seed}};
  j["optim"] = {{"lr", c.optim.lr},
                {"weight_decay", c.optim.weight_decay},
                {"warmup_fraction", c.optim.warmup_fraction},
                {"beta1", c.optim.beta1},
                {"beta2", c.optim.beta2},
                {"eps", c.optim.eps},
                {"epochs", c.optim.epochs},
                {"batch_size", c.optim.batch_size}};
  j["drop"] = {{"variant", to_string(c.drop.variant)},
               {"p", c.drop.p},
               {"k", c.drop.k},
               {"sigma_max", c.drop.sigma_max},
               {"w", c.drop.w},
               {"lambda", c.drop.lambda},
               {"consistency", c.drop.consistency},
               {"seed", c.drop.seed},
               {"blur_mode", to_string(c.drop.blur_mode)},
               {"kernel_steps", c.drop.kernel_steps}};
  j["eval"] = {{"ece_bins", c.eval.ece_bins}, {"probe_batches", c.eval.probe_batches}};
  j["output"] = {{"dir", c.output.dir}, {"name", c.output.name}};
  j["kernel_table"] = c.kernel_table_path;
  j["record_wall_time"] = c.record_wall_time;
  return j;
}

ordered_json variance_json(const VarianceReport& r) {
  return {{"var_base", r.var_base},
          {"var_ad", r.var_ad},
          {"var_delta", r.var_delta},
          {"cov", r.cov},
          {"identity_residual", r.identity_residual},
          {"condition_holds", r.condition_holds}};
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section s(j, "");
  if (const auto* v = s.child("task")) parse_task(*v, c.task);
  if (const auto* v = s.child("model")) parse_model(*v, c.model);
  if (const auto* v = s.child("optim")) parse_optim(*v, c.optim);
  if (const auto* v = s.child("drop")) parse_drop(*v, c.drop);
  if (const auto* v = s.child("eval")) parse_eval(*v, c.eval);
  if (const auto* v = s.child("output")) parse_output(*v, c.output);
  s.read("kernel_table", c.kernel_table_path);
  s.read("record_wall_time", c.record_wall_time);
  s.finish();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string run_config_to_json(const RunConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string run_record_csv(const RunRecord& record) {
  std::string out = std::string(kRunCsvHeader) + "\n";
  for (const auto& r : record.epochs) {
    out += std::to_string(r.epoch);
    for (double v : {r.task_loss, r.cons_loss, r.train_acc, r.val_acc, r.ece, r.grad_var, r.wall_ms}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string variance_report_json(const VarianceReport& report) { return variance_json(report).dump(2) + "\n"; }

std::string run_record_json(const RunRecord& record) {
  ordered_json j;
  j["config"] = config_json(record.config);
  j["seeds"] = {{"task", record.config.task.seed},
                {"model", record.config.model.seed},
                {"drop", record.config.drop.seed}};
  j["parameter_count"] = record.parameter_count;
  auto rows = ordered_json::array();
  for (const auto& r : record.epochs) {
    rows.push_back({{"epoch", r.epoch},
                    {"task_loss", r.task_loss},
                    {"cons_loss", r.cons_loss},
                    {"train_acc", r.train_acc},
                    {"val_acc", r.val_acc},
                    {"ece", r.ece},
                    {"grad_var", r.grad_var},
                    {"wall_ms", r.wall_ms}});
  }
  j["epochs"] = rows;
  j["final_variance"] = variance_json(record.final_variance);
  return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_run_record(const RunRecord& record, const std::filesystem::path& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  write_text_file(dir / (name + ".csv"), run_record_csv(record));
  write_text_file(dir / (name + ".json"), run_record_json(record));
}

}  // namespace attndrop
