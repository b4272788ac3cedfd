#include "hcval/report.hpp"

#include <sstream>

#include "json.hpp"

namespace hcval {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

ordered box_to_json(const Box& b) {
  ordered out = ordered::object();
  for (const auto& [name, iv] : b) out[name] = {iv.lo, iv.hi};
  return out;
}

Box box_from_json(const ordered& j) {
  std::vector<std::pair<std::string, Interval>> entries;
  for (auto it = j.begin(); it != j.end(); ++it)
    entries.emplace_back(it.key(),
                         Interval{it.value()[0].get<double>(),
                                  it.value()[1].get<double>()});
  return Box(std::move(entries));
}

ordered point_to_json(const Point& p) {
  ordered out = ordered::object();
  for (const auto& [name, v] : p) out[name] = v;
  return out;
}

}  // namespace

std::string report_to_json(const ValidationReport& rep) {
  ordered j;
  j["model"] = rep.model_name;
  j["delta"] = rep.delta;
  j["precision"] = rep.precision;
  j["horizon"] = rep.horizon;
  j["budget"] = rep.budget;
  j["verdicts"] = ordered::array();
  for (const auto& v : rep.verdicts)
    j["verdicts"].push_back({{"analysis", v.analysis}, {"verdict", v.verdict}});
  j["findings"] = ordered::array();
  for (const auto& f : rep.findings) {
    ordered jf;
    jf["kind"] = finding_kind_text(f.kind);
    jf["warning"] = f.warning;
    if (f.witness) jf["witness"] = box_to_json(*f.witness);
    if (f.certificate) jf["certificate"] = point_to_json(*f.certificate);
    jf["involved"] = f.involved;
    jf["narrative"] = f.narrative;
    jf["delta"] = f.delta;
    j["findings"].push_back(std::move(jf));
  }
  return j.dump(2) + "\n";
}

ValidationReport report_from_json(const std::string& json_text) {
  ordered j = ordered::parse(json_text);
  ValidationReport rep;
  rep.model_name = j.at("model").get<std::string>();
  rep.delta = j.at("delta").get<double>();
  rep.precision = j.at("precision").get<double>();
  rep.horizon = j.at("horizon").get<int>();
  rep.budget = j.at("budget").get<std::int64_t>();
  for (const auto& v : j.at("verdicts"))
    rep.verdicts.push_back({v.at("analysis").get<std::string>(),
                            v.at("verdict").get<std::string>()});
  for (const auto& jf : j.at("findings")) {
    Finding f;
    f.kind = finding_kind_from(jf.at("kind").get<std::string>());
    f.warning = jf.at("warning").get<bool>();
    if (jf.contains("witness")) f.witness = box_from_json(jf.at("witness"));
    if (jf.contains("certificate")) {
      Point p;
      for (auto it = jf.at("certificate").begin();
           it != jf.at("certificate").end(); ++it)
        p[it.key()] = it.value().get<double>();
      f.certificate = std::move(p);
    }
    f.involved = jf.at("involved").get<std::vector<std::string>>();
    f.narrative = jf.at("narrative").get<std::string>();
    f.delta = jf.at("delta").get<double>();
    rep.findings.push_back(std::move(f));
  }
  return rep;
}

std::string report_to_text(const ValidationReport& rep) {
  std::ostringstream out;
  out << "model: " << rep.model_name << "\n";
  out << "config: delta = " << format_number(rep.delta)
      << ", precision = " << format_number(rep.precision)
      << ", horizon = " << rep.horizon << ", budget = " << rep.budget << "\n";
  for (const auto& v : rep.verdicts)
    out << "analysis " << v.analysis << ": " << v.verdict << "\n";
  if (rep.findings.empty()) {
    out << "no findings\n";
    return out.str();
  }
  for (const auto& f : rep.findings) {
    out << (f.warning ? "warning" : "finding") << " ["
        << finding_kind_text(f.kind) << "]";
    if (!f.involved.empty()) {
      out << " involving";
      for (const auto& l : f.involved) out << " " << l;
    }
    out << "\n  " << f.narrative << "\n";
    if (f.witness) {
      out << "  witness box:\n";
      for (const auto& [name, iv] : *f.witness)
        out << "    " << name << " : [" << format_number(iv.lo) << ", "
            << format_number(iv.hi) << "]\n";
    }
    if (f.certificate) {
      out << "  certificate:\n";
      for (const auto& [name, val] : *f.certificate)
        out << "    " << name << " = " << format_number(val) << "\n";
    }
  }
  return out.str();
}

}  // namespace hcval
