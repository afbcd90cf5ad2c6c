#include "radarnet/cop_io.hpp"

#include <fstream>
#include <json.hpp>

#include "radarnet/errors.hpp"

namespace radarnet::cop {

using nlohmann::json;

CopInstance read_instance(std::istream& in) {
  try {
    const json doc = json::parse(in);
    std::vector<int> radar_ids;
    std::vector<Load> budgets;
    for (const auto& r : doc.at("radars")) {
      radar_ids.push_back(r.at("id").get<int>());
      budgets.push_back(Load::from_double(r.at("budget").get<double>()));
    }
    const auto target_ids = doc.at("targets").get<std::vector<int>>();
    CopInstance inst(radar_ids, target_ids);
    const std::size_t nI = inst.n_radars(), nJ = inst.n_targets();

    const auto& gamma = doc.at("gamma");
    const auto& c = doc.at("c");
    if (gamma.size() != nI || c.size() != nI) throw ParseError("gamma and c need one row per radar");
    for (std::size_t i = 0; i < nI; ++i) {
      inst.set_budget(i, budgets[i]);
      if (gamma[i].size() != nJ) throw ParseError("gamma row needs one entry per target");
      for (std::size_t j = 0; j < nJ; ++j) inst.set_gamma(i, j, Load::from_double(gamma[i][j].get<double>()));
      if (c[i].size() != nI) throw ParseError("c[i] needs one row per optional radar");
      for (std::size_t k = 0; k < nI; ++k) {
        if (c[i][k].size() != nJ) throw ParseError("c[i][k] needs one entry per target");
        for (std::size_t j = 0; j < nJ; ++j) inst.set_c(i, k, j, c[i][k][j].get<double>());
      }
    }
    return inst;
  } catch (const json::exception& e) {
    throw ParseError(std::string("instance: ") + e.what());
  } catch (const ContractError& e) {
    throw ParseError(std::string("instance: ") + e.what());
  } catch (const EmptyInstance& e) {
    throw ParseError(std::string("instance: ") + e.what());
  }
}

CopInstance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_instance(in);
}

void write_instance(std::ostream& out, const CopInstance& inst) {
  json doc;
  doc["radars"] = json::array();
  for (std::size_t i = 0; i < inst.n_radars(); ++i) {
    doc["radars"].push_back({{"id", inst.radar_ids()[i]}, {"budget", inst.budget(i).to_double()}});
  }
  doc["targets"] = inst.target_ids();
  doc["gamma"] = json::array();
  doc["c"] = json::array();
  for (std::size_t i = 0; i < inst.n_radars(); ++i) {
    json g = json::array();
    json ci = json::array();
    for (std::size_t j = 0; j < inst.n_targets(); ++j) g.push_back(inst.gamma(i, j).to_double());
    for (std::size_t k = 0; k < inst.n_radars(); ++k) {
      json row = json::array();
      for (std::size_t j = 0; j < inst.n_targets(); ++j) row.push_back(inst.c(i, k, j));
      ci.push_back(row);
    }
    doc["gamma"].push_back(g);
    doc["c"].push_back(ci);
  }
  out << doc.dump(2) << '\n';
}

}  // namespace radarnet::cop
