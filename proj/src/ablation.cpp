// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include "attndrop/ablation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <thread>

#include "attndrop/errors.hpp"
#include "attndrop/run_io.hpp"

namespace attndrop {

std::string to_string(AblationFamily f) {
  switch (f) {
    case AblationFamily::kHardMask: return "hardmask";
    case AblationFamily::kBlur: return "blur";
    case AblationFamily::kConsistency: return "consistency";
  }
  return "?";
}

AblationFamily ablation_family_from_string(const std::string& s) {
  if (s == "hardmask") return AblationFamily::kHardMask;
  if (s == "blur") return AblationFamily::kBlur;
  if (s == "consistency") return AblationFamily::kConsistency;
  throw ConfigError("unknown ablation family '" + s + "' (expected hardmask, blur or consistency)");
}

namespace {

bool has_family(const AblationGrid& g, AblationFamily f) {
  return std::find(g.families.begin(), g.families.end(), f) != g.families.end();
}

std::vector<DropConfig> hard_mask_drops(const RunConfig& base, const AblationGrid& g) {
  std::vector<DropConfig> out;
  for (double p : g.p) {
    for (auto k : g.k) {
      DropConfig d = base.drop;
      d.variant = DropVariant::kHardMask;
      d.p = p;
      d.k = k;
      d.consistency = false;
      out.push_back(d);
    }
  }
  return out;
}

std::vector<DropConfig> blur_drops(const RunConfig& base, const AblationGrid& g) {
  std::vector<DropConfig> out;
  for (double s : g.sigma_max) {
    DropConfig d = base.drop;
    d.variant = DropVariant::kBlurSmooth;
    d.sigma_max = s;
    d.w = g.w;
    d.consistency = false;
    out.push_back(d);
  }
  return out;
}

std::string drop_tag(const DropConfig& d) {
  if (d.variant == DropVariant::kHardMask) return "hardmask_p" + format_double(d.p) + "_k" + std::to_string(d.k);
  return "blur_s" + format_double(d.sigma_max) + "_w" + std::to_string(d.w);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::size_t AblationGrid::cardinality() const {
  const std::size_t hm = p.size() * k.size(), bl = sigma_max.size();
  std::size_t n = 0;
  if (has_family(*this, AblationFamily::kHardMask)) n += hm;
  if (has_family(*this, AblationFamily::kBlur)) n += bl;
  if (has_family(*this, AblationFamily::kConsistency)) n += (hm + bl) * lambda.size();
  return n;
}

std::vector<AblationCell> ablation_cells(const RunConfig& base, const AblationGrid& grid) {
  const auto hm = hard_mask_drops(base, grid);
  const auto bl = blur_drops(base, grid);
  std::vector<AblationCell> cells;
  auto push = [&](AblationFamily f, const DropConfig& d, std::string tag) {
    AblationCell c;
    c.index = cells.size();
    c.family = f;
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "c%03zu_", c.index);
    c.name = prefix + tag;
    c.config = base;
    c.config.drop = d;
    c.config.drop.seed = base.drop.seed + c.index;
    c.config.output.name = c.name;
    cells.push_back(std::move(c));
  };
  if (has_family(grid, AblationFamily::kHardMask)) {
    for (const auto& d : hm) push(AblationFamily::kHardMask, d, drop_tag(d));
  }
  if (has_family(grid, AblationFamily::kBlur)) {
    for (const auto& d : bl) push(AblationFamily::kBlur, d, drop_tag(d));
  }
  if (has_family(grid, AblationFamily::kConsistency)) {
    for (const auto* family : {&hm, &bl}) {
      for (const auto& src : *family) {
        for (double lambda : grid.lambda) {
          DropConfig d = src;
          d.consistency = true;
          d.lambda = lambda;
          push(AblationFamily::kConsistency, d, "cons_" + drop_tag(d) + "_l" + format_double(lambda));
        }
      }
    }
  }
  return cells;
}

std::vector<AblationResult> run_ablation(const RunConfig& base, const AblationGrid& grid,
                                         const std::filesystem::path& out_dir, std::size_t jobs) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory '" + out_dir.string() + "': " + ec.message());

  const auto cells = ablation_cells(base, grid);
  std::vector<AblationResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
      auto& r = results[i];
      r.cell = cells[i];
      try {
        const auto record = run_training(r.cell.config);
        write_run_record(record, out_dir, r.cell.name);
        const auto& last = record.epochs.back();
        r.val_acc = last.val_acc;
        r.ece = last.ece;
        r.grad_var = last.grad_var;
        r.ok = true;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const auto n_threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(cells.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  write_text_file(out_dir / "summary.csv", ablation_summary_csv(results));
  return results;
}

std::string ablation_summary_csv(const std::vector<AblationResult>& results) {
  std::string out = std::string(kAblationSummaryHeader) + "\n";
  for (const auto& r : results) {
    const auto& d = r.cell.config.drop;
    out += std::to_string(r.cell.index) + "," + r.cell.name + "," + to_string(r.cell.family) + "," +
           to_string(d.variant) + "," + format_double(d.p) + "," + std::to_string(d.k) + "," +
           format_double(d.sigma_max) + "," + std::to_string(d.w) + "," + format_double(d.lambda) + "," +
           (d.consistency ? "true" : "false") + "," + std::to_string(d.seed) + "," + (r.ok ? "ok" : "failed") + ",";
    if (r.ok) {
      out += format_double(r.val_acc) + "," + format_double(r.ece) + "," + format_double(r.grad_var) + ",";
    } else {
      out += ",,," + csv_field(r.error);
    }
    out += "\n";
  }
  return out;
}

}  // namespace attndrop
