#include "stacksim/waveform_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stacksim {

namespace {

std::string sci9(double v) { // 9 significant digits
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

std::string axis_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

} // namespace

std::string waveform_to_csv(const Waveform& w) {
  std::ostringstream os;
  os << "time_s";
  for (const auto& n : w.names) os << "," << n;
  os << "\n";
  for (size_t r = 0; r < w.time.size(); ++r) {
    os << sci9(w.time[r]);
    for (int c = 0; c < w.samples.cols(); ++c) os << "," << sci9(w.samples(r, c));
    os << "\n";
  }
  return os.str();
}

Waveform waveform_from_csv(const std::string& text) {
  Waveform w;
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::istringstream hs(line);
  std::string field;
  bool first = true;
  while (std::getline(hs, field, ',')) {
    if (first) {
      if (field != "time_s") throw std::runtime_error("CSV header must start with time_s");
      first = false;
    } else {
      w.names.push_back(field);
    }
  }
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    while (std::getline(ls, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw std::runtime_error("bad number '" + field + "' at CSV line " +
                                 std::to_string(line_no));
      }
    }
    if (row.size() != w.names.size() + 1)
      throw std::runtime_error("wrong field count at CSV line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  w.time.resize(rows.size());
  w.samples.resize(static_cast<int>(rows.size()), static_cast<int>(w.names.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    w.time[r] = rows[r][0];
    for (size_t c = 0; c < w.names.size(); ++c)
      w.samples(static_cast<int>(r), static_cast<int>(c)) = rows[r][c + 1];
  }
  return w;
}

std::string render_waveform_svg(const Waveform& w, const std::vector<std::string>& signals) {
  if (w.time.empty()) throw std::invalid_argument("empty waveform");
  std::vector<int> cols;
  for (const auto& name : signals) {
    const int c = w.column(name);
    if (c < 0) {
      std::string avail;
      for (const auto& n : w.names) avail += (avail.empty() ? "" : ", ") + n;
      throw std::invalid_argument("unknown signal '" + name + "'; available: " + avail);
    }
    cols.push_back(c);
  }
  if (cols.empty()) throw std::invalid_argument("no signals requested");

  const double width = 960, height = 540;
  const double ml = 70, mr = 160, mt = 20, mb = 45;
  const double pw = width - ml - mr, ph = height - mt - mb;

  const double t0 = w.time.front(), t1 = w.time.back();
  double vmin = 1e300, vmax = -1e300;
  for (int c : cols)
    for (size_t r = 0; r < w.time.size(); ++r) {
      vmin = std::min(vmin, w.samples(r, c));
      vmax = std::max(vmax, w.samples(r, c));
    }
  if (vmax <= vmin) {
    vmax = vmin + 1.0;
    vmin -= 1.0;
  }
  const double pad = 0.05 * (vmax - vmin);
  vmin -= pad;
  vmax += pad;

  auto xof = [&](double t) { return ml + pw * (t - t0) / (t1 - t0); };
  auto yof = [&](double v) { return mt + ph * (1.0 - (v - vmin) / (vmax - vmin)); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
     << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  // axes and ticks
  os << "<g stroke=\"#444\" stroke-width=\"1\">\n"
     << "<line x1=\"" << px(ml) << "\" y1=\"" << px(mt + ph) << "\" x2=\"" << px(ml + pw)
     << "\" y2=\"" << px(mt + ph) << "\"/>\n"
     << "<line x1=\"" << px(ml) << "\" y1=\"" << px(mt) << "\" x2=\"" << px(ml) << "\" y2=\""
     << px(mt + ph) << "\"/>\n</g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">\n";
  const int nticks = 5;
  for (int k = 0; k <= nticks; ++k) {
    const double t = t0 + (t1 - t0) * k / nticks;
    const double x = xof(t);
    os << "<line x1=\"" << px(x) << "\" y1=\"" << px(mt + ph) << "\" x2=\"" << px(x)
       << "\" y2=\"" << px(mt + ph + 5) << "\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << px(x) << "\" y=\"" << px(mt + ph + 18)
       << "\" text-anchor=\"middle\">" << axis_label(t) << "</text>\n";
    const double v = vmin + (vmax - vmin) * k / nticks;
    const double y = yof(v);
    os << "<line x1=\"" << px(ml - 5) << "\" y1=\"" << px(y) << "\" x2=\"" << px(ml)
       << "\" y2=\"" << px(y) << "\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << px(ml - 8) << "\" y=\"" << px(y + 4)
       << "\" text-anchor=\"end\">" << axis_label(v) << "</text>\n";
  }
  os << "<text x=\"" << px(ml + pw / 2) << "\" y=\"" << px(height - 8)
     << "\" text-anchor=\"middle\">time [s]</text>\n";
  os << "</g>\n";

  for (size_t k = 0; k < cols.size(); ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[k % 8]
       << "\" stroke-width=\"1.5\" points=\"";
    for (size_t r = 0; r < w.time.size(); ++r) {
      if (r) os << " ";
      os << px(xof(w.time[r])) << "," << px(yof(w.samples(r, cols[k])));
    }
    os << "\"/>\n";
  }

  os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (size_t k = 0; k < cols.size(); ++k) {
    const double y = mt + 14 + 16 * static_cast<double>(k);
    os << "<line x1=\"" << px(ml + pw + 10) << "\" y1=\"" << px(y - 4) << "\" x2=\""
       << px(ml + pw + 30) << "\" y2=\"" << px(y - 4) << "\" stroke=\"" << kPalette[k % 8]
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << px(ml + pw + 35) << "\" y=\"" << px(y) << "\">" << signals[k]
       << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

} // namespace stacksim
