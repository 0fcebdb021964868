#include "gibbsmix/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gibbsmix/version.hpp"

namespace gibbsmix::io {
namespace {

nlohmann::json optional_json(const std::optional<std::size_t>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

std::string format_double(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

void write_tv_curve_csv(const std::filesystem::path& path,
                        std::span<const std::pair<std::size_t, double>> curve) {
  std::ostringstream out;
  out << "t,tv\n";
  for (const auto& [t, tv] : curve) out << t << ',' << format_double(tv) << '\n';
  write_text(path, out.str());
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& record) {
  std::ostringstream out;
  if (!record.points.empty()) {
    out << "step,u,v\n";
    for (std::size_t s = 0; s < record.points.size(); ++s) {
      out << s << ',' << format_double(record.points[s].u) << ','
          << format_double(record.points[s].v) << '\n';
    }
  } else if (!record.unreflected.empty()) {
    out << "step,value,unreflected\n";
    for (std::size_t s = 0; s < record.scalars.size(); ++s) {
      out << s << ',' << format_double(record.scalars[s]) << ','
          << format_double(record.unreflected[s]) << '\n';
    }
  } else {
    out << "step,value\n";
    for (std::size_t s = 0; s < record.scalars.size(); ++s) {
      out << s << ',' << format_double(record.scalars[s]) << '\n';
    }
  }
  write_text(path, out.str());
}

void write_time_histogram_csv(const std::filesystem::path& path,
                              std::span<const std::optional<std::size_t>> times) {
  std::map<std::size_t, std::size_t> counts;
  std::size_t never = 0;
  for (const auto& t : times) {
    if (t) {
      ++counts[*t];
    } else {
      ++never;
    }
  }
  std::ostringstream out;
  out << "time,count\n";
  for (const auto& [t, c] : counts) out << t << ',' << c << '\n';
  out << "never," << never << '\n';
  write_text(path, out.str());
}

void write_sidecar(const std::filesystem::path& artifact, const std::string& kind, double a,
                   std::optional<std::size_t> n) {
  nlohmann::json meta = {
      {"kind", kind},
      {"a", a},
      {"n", optional_json(n)},
      {"version", kVersion},
  };
  std::filesystem::path sidecar = artifact;
  sidecar += ".meta.json";
  write_json(sidecar, meta);
}

nlohmann::json to_json(const MixingResult& result) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& [t, tv] : result.tv_curve) curve.push_back({t, tv});
  return {
      {"a", result.a},
      {"n", result.n},
      {"epsilon", result.epsilon},
      {"start", {result.start.u, result.start.v}},
      {"converged", result.converged},
      {"t_mix", result.converged ? nlohmann::json(result.t_mix) : nlohmann::json(nullptr)},
      {"t_mix_over_a2", result.converged
                            ? nlohmann::json(static_cast<double>(result.t_mix) /
                                             (result.a * result.a))
                            : nlohmann::json(nullptr)},
      {"tv_curve", std::move(curve)},
  };
}

nlohmann::json to_json(const TrajectoryRecord& record) {
  nlohmann::json doc = {
      {"process", to_string(record.process)},
      {"steps", record.steps},
      {"seed", record.seed},
      {"stream", record.stream},
      {"stopping",
       {{"nu_m", optional_json(record.stopping.nu_m)},
        {"nu_m_tilde", optional_json(record.stopping.nu_m_tilde)},
        {"nu_m_hat", optional_json(record.stopping.nu_m_hat)},
        {"nu_c1", optional_json(record.stopping.nu_c1)},
        {"nu_c2", optional_json(record.stopping.nu_c2)}}},
  };
  switch (record.process) {
    case Process::X:
      doc["direction_changes"] = record.direction_changes;
      if (record.first_direction) {
        doc["first_direction"] = *record.first_direction == Direction::U ? "U" : "V";
      }
      [[fallthrough]];
    case Process::XStar:
    case Process::Y:
    case Process::YPrime:
      doc["terminal"] = {record.terminal.u, record.terminal.v};
      break;
    case Process::Z:
      doc["terminal_unreflected"] = record.terminal_unreflected;
      [[fallthrough]];
    case Process::W:
      doc["terminal"] = record.terminal_scalar;
      break;
  }
  return doc;
}

}  // namespace gibbsmix::io
