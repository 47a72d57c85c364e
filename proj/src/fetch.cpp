#include "paragen/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "paragen/errors.hpp"
#include "paragen/vocab.hpp"

namespace paragen {

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool is_block_tag(std::string_view name) {
  static const char* kBlocks[] = {"p",      "div",     "br",     "h1",    "h2",     "h3",
                                  "h4",     "h5",      "h6",     "li",    "ul",     "ol",
                                  "tr",     "table",   "section", "article", "header", "footer",
                                  "blockquote", "pre", "nav",    "aside", "main",   "figure",
                                  "figcaption", "dd",  "dt",     "dl",    "hr",     "title",
                                  "td",     "th",      "form",   "body",  "html"};
  for (const char* b : kBlocks) {
    if (name == b) return true;
  }
  return false;
}

void append_code_point(std::string& out, unsigned long cp) {
  if (cp == 0 || cp > 0x10FFFF) return;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes the entity starting at text[pos] == '&'. Returns the number of
// bytes consumed, 0 when it is not a recognised entity.
std::size_t decode_entity(std::string_view text, std::size_t pos, std::string& out) {
  const std::size_t semi = text.find(';', pos);
  if (semi == std::string_view::npos || semi - pos > 10) return 0;
  const std::string_view name = text.substr(pos + 1, semi - pos - 1);
  if (name.empty()) return 0;
  if (name[0] == '#') {
    unsigned long cp = 0;
    try {
      cp = (name.size() > 1 && (name[1] == 'x' || name[1] == 'X'))
               ? std::stoul(std::string(name.substr(2)), nullptr, 16)
               : std::stoul(std::string(name.substr(1)), nullptr, 10);
    } catch (...) {
      return 0;
    }
    append_code_point(out, cp == 0xA0 ? ' ' : cp);
    return semi - pos + 1;
  }
  static const std::map<std::string_view, unsigned long> kNamed = {
      {"amp", '&'},     {"lt", '<'},      {"gt", '>'},      {"quot", '"'},    {"apos", '\''},
      {"nbsp", ' '},    {"agrave", 0xE0}, {"egrave", 0xE8}, {"eacute", 0xE9}, {"igrave", 0xEC},
      {"ograve", 0xF2}, {"ugrave", 0xF9}, {"Agrave", 0xC0}, {"Egrave", 0xC8}, {"Eacute", 0xC9},
      {"laquo", 0xAB},  {"raquo", 0xBB},  {"rsquo", 0x2019}, {"lsquo", 0x2018},
      {"ldquo", 0x201C}, {"rdquo", 0x201D}, {"hellip", 0x2026}, {"ndash", 0x2013},
      {"mdash", 0x2014}};
  auto it = kNamed.find(name);
  if (it == kNamed.end()) return 0;
  append_code_point(out, it->second);
  return semi - pos + 1;
}

// Position just past the closing tag `</name ...>` at or after pos, or npos.
std::size_t skip_element(std::string_view lower_html, std::size_t pos, std::string_view name) {
  const std::string close = "</" + std::string(name);
  const std::size_t at = lower_html.find(close, pos);
  if (at == std::string_view::npos) return std::string_view::npos;
  const std::size_t gt = lower_html.find('>', at);
  return gt == std::string_view::npos ? std::string_view::npos : gt + 1;
}

} // namespace

std::string strip_html(std::string_view html) {
  const std::string lowered = lower_ascii(html);
  std::string text;
  std::size_t i = 0;
  while (i < html.size()) {
    const char c = html[i];
    if (c == '<') {
      if (html.substr(i, 4) == "<!--") {
        const std::size_t end = html.find("-->", i + 4);
        i = end == std::string_view::npos ? html.size() : end + 3;
        continue;
      }
      const std::size_t gt = html.find('>', i);
      if (gt == std::string_view::npos) break;
      std::size_t name_start = i + 1;
      const bool closing = name_start < gt && html[name_start] == '/';
      if (closing) ++name_start;
      std::size_t name_end = name_start;
      while (name_end < gt && (std::isalnum(static_cast<unsigned char>(html[name_end])))) ++name_end;
      const std::string name = lowered.substr(name_start, name_end - name_start);
      if (!closing && (name == "script" || name == "style" || name == "head" ||
                       name == "noscript" || name == "template")) {
        const std::size_t after = skip_element(lowered, gt + 1, name);
        i = after == std::string_view::npos ? html.size() : after;
        text.push_back('\n');
        continue;
      }
      if (is_block_tag(name)) text.push_back('\n');
      i = gt + 1;
      continue;
    }
    if (c == '&') {
      const std::size_t used = decode_entity(html, i, text);
      if (used > 0) {
        i += used;
        continue;
      }
    }
    text.push_back(c);
    ++i;
  }

  std::string out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line;
    bool space = false;
    for (std::size_t k = start; k < end; ++k) {
      const char ch = text[k];
      if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\f' || ch == '\v') {
        space = !line.empty();
        continue;
      }
      if (space) line.push_back(' ');
      space = false;
      line.push_back(ch);
    }
    if (!line.empty()) {
      if (!out.empty()) out.push_back('\n');
      out += line;
    }
    start = end + 1;
  }
  return out;
}

std::string extract_title(std::string_view html) {
  const std::string lowered = lower_ascii(html);
  const std::size_t open = lowered.find("<title");
  if (open == std::string::npos) return {};
  const std::size_t gt = lowered.find('>', open);
  if (gt == std::string::npos) return {};
  const std::size_t close = lowered.find("</title", gt);
  if (close == std::string::npos) return {};
  return strip_html(html.substr(gt + 1, close - gt - 1));
}

RobotsRules RobotsRules::parse(std::string_view text, std::string_view user_agent) {
  struct Group {
    std::vector<std::string> agents;
    std::vector<std::string> allow;
    std::vector<std::string> disallow;
  };
  std::vector<Group> groups;
  bool in_agents = false;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = lower_ascii(trim(line.substr(0, colon)));
    const std::string value = trim(line.substr(colon + 1));
    if (key == "user-agent") {
      if (!in_agents) groups.emplace_back();
      groups.back().agents.push_back(lower_ascii(value));
      in_agents = true;
    } else if (key == "allow" || key == "disallow") {
      in_agents = false;
      if (groups.empty()) continue;
      if (key == "allow") {
        groups.back().allow.push_back(value);
      } else {
        groups.back().disallow.push_back(value);
      }
    } else {
      in_agents = false;
    }
  }

  const std::string agent = lower_ascii(user_agent);
  const std::string product = agent.substr(0, agent.find('/'));
  const Group* chosen = nullptr;
  std::size_t best = 0;
  for (const auto& g : groups) {
    for (const auto& a : g.agents) {
      if (a == "*" && !chosen) {
        chosen = &g;
      } else if (a != "*" && !a.empty() && product.find(a) != std::string::npos && a.size() > best) {
        chosen = &g;
        best = a.size();
      }
    }
  }
  RobotsRules rules;
  if (chosen) {
    for (const auto& a : chosen->allow) {
      if (!a.empty()) rules.allow_.push_back(a);
    }
    for (const auto& d : chosen->disallow) {
      if (!d.empty()) rules.disallow_.push_back(d);
    }
  }
  return rules;
}

bool RobotsRules::allowed(std::string_view path) const {
  std::size_t allow_len = 0, disallow_len = 0;
  bool any_allow = false, any_disallow = false;
  for (const auto& a : allow_) {
    if (path.substr(0, a.size()) == a && a.size() >= allow_len) {
      allow_len = a.size();
      any_allow = true;
    }
  }
  for (const auto& d : disallow_) {
    if (path.substr(0, d.size()) == d && d.size() >= disallow_len) {
      disallow_len = d.size();
      any_disallow = true;
    }
  }
  if (!any_disallow) return true;
  return any_allow && allow_len >= disallow_len;
}

std::string Url::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

Url parse_url(std::string_view url) {
  Url u;
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) throw ValidationError("not an absolute URL: " + std::string(url));
  u.scheme = lower_ascii(url.substr(0, sep));
  if (u.scheme != "http" && u.scheme != "https") {
    throw ValidationError("unsupported URL scheme: " + std::string(url));
  }
  std::string_view rest = url.substr(sep + 3);
  const auto slash = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, slash);
  u.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (!u.path.empty() && u.path[0] != '/') u.path = "/" + u.path;
  if (auto hash = u.path.find('#'); hash != std::string::npos) u.path.resize(hash);
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    try {
      u.port = std::stoi(std::string(authority.substr(colon + 1)));
    } catch (...) {
      throw ValidationError("bad port in URL: " + std::string(url));
    }
    authority = authority.substr(0, colon);
  } else {
    u.port = u.scheme == "https" ? 443 : 80;
  }
  if (authority.empty()) throw ValidationError("missing host in URL: " + std::string(url));
  u.host = lower_ascii(authority);
  return u;
}

std::string http_date_to_iso8601(std::string_view http_date) {
  static const char* kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  int day = 0, year = 0, hh = 0, mm = 0, ss = 0;
  char month[4] = {0};
  const std::string s(http_date);
  if (std::sscanf(s.c_str(), "%*3s, %d %3s %d %d:%d:%d", &day, month, &year, &hh, &mm, &ss) != 6) {
    return {};
  }
  int mon = 0;
  for (int m = 0; m < 12; ++m) {
    if (std::string_view(month) == kMonths[m]) mon = m + 1;
  }
  if (mon == 0) return {};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", year, mon, day, hh, mm, ss);
  return buf;
}

Document document_from_html(std::string_view url, std::string_view html, std::string timestamp) {
  Document d;
  d.id = std::string(url);
  d.source = parse_url(url).host;
  d.title = extract_title(html);
  d.body = strip_html(html);
  d.timestamp = std::move(timestamp);
  return d;
}

IngestReport ingest_urls(std::span<const std::string> urls, const FetchConfig& cfg) {
  struct Job {
    std::string raw;
    Url url;
  };
  IngestReport report;
  std::map<std::string, std::vector<Job>> by_host;
  for (const auto& raw : urls) {
    try {
      Url u = parse_url(raw);
      by_host[u.origin()].push_back({raw, std::move(u)});
    } catch (const ValidationError& e) {
      report.warnings.push_back(std::string("skipping ") + e.what());
    }
  }
  std::vector<const std::vector<Job>*> hosts;
  for (const auto& [origin, jobs] : by_host) hosts.push_back(&jobs);

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t h = next++; h < hosts.size(); h = next++) {
      const auto& jobs = *hosts[h];
      const Url& first = jobs.front().url;
      httplib::Client client(first.scheme + "://" + first.host + ":" + std::to_string(first.port));
      client.set_connection_timeout(cfg.timeout_seconds, 0);
      client.set_read_timeout(cfg.timeout_seconds, 0);
      client.set_follow_location(true);
      const httplib::Headers headers = {{"User-Agent", cfg.user_agent}};
      const auto interval = std::chrono::duration<double>(cfg.min_interval_seconds);
      auto last = std::chrono::steady_clock::time_point::min();
      auto pace = [&] {
        if (last != std::chrono::steady_clock::time_point::min()) {
          const auto wait = last + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval);
          std::this_thread::sleep_until(wait);
        }
        last = std::chrono::steady_clock::now();
      };

      RobotsRules robots;
      if (cfg.respect_robots) {
        pace();
        auto res = client.Get("/robots.txt", headers);
        if (res && res->status == 200) robots = RobotsRules::parse(res->body, cfg.user_agent);
      }
      for (const Job& job : jobs) {
        std::string warning;
        std::optional<Document> doc;
        if (cfg.respect_robots && !robots.allowed(job.url.path)) {
          warning = "skipping " + job.raw + ": disallowed by robots.txt";
        } else {
          pace();
          auto res = client.Get(job.url.path, headers);
          if (!res) {
            warning = "skipping " + job.raw + ": " + httplib::to_string(res.error());
          } else if (res->status != 200) {
            warning = "skipping " + job.raw + ": HTTP " + std::to_string(res->status);
          } else {
            std::string stamp = http_date_to_iso8601(res->get_header_value("Last-Modified"));
            if (stamp.empty()) stamp = http_date_to_iso8601(res->get_header_value("Date"));
            Document d = document_from_html(job.raw, res->body, std::move(stamp));
            if (d.body.empty()) {
              warning = "skipping " + job.raw + ": no text content";
            } else {
              doc = std::move(d);
            }
          }
        }
        std::lock_guard<std::mutex> lock(mu);
        if (doc) report.documents.push_back(std::move(*doc));
        if (!warning.empty()) report.warnings.push_back(std::move(warning));
      }
    }
  };

  const std::size_t pool = std::max<std::size_t>(1, std::min(cfg.workers, hosts.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  std::sort(report.documents.begin(), report.documents.end(),
            [](const Document& a, const Document& b) { return a.id < b.id; });
  report.documents.erase(std::unique(report.documents.begin(), report.documents.end(),
                                     [](const Document& a, const Document& b) { return a.id == b.id; }),
                         report.documents.end());
  std::sort(report.warnings.begin(), report.warnings.end());
  return report;
}

} // namespace paragen
