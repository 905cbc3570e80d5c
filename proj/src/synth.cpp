#include "cbott/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace cbott {

namespace {

// A scenario is a weighted list of command templates. Slots:
//   {shell}  host's habitual shell invocation prefix
//   {sys}    host's system-tool path prefix
//   {docsdir} host's working folder name
//   {user}   account name, primary-biased
//   {app}    application from the host's installed set
//   {site}   intranet site from the host's bookmark pair
//   {doc}    document from the host's working set
//   {office} office executable
//   {browser} browser executable, primary-biased
//   {script} maintenance script from the host's pair
//   {share}  file share mounted by the host
//   {tag}    workstation name, unique per host
//
// Hosts phrase the same logical activity differently (shell prefix, tool
// path, folder layout), so tasks from different hosts overlap heavily in
// terms while their token sequences stay host-specific.
struct Scenario {
  int weight;
  std::vector<const char*> commands;
};

// Scenario frequencies are deliberately flat: every activity recurs often
// enough per host that its windows are well learned, so anomaly signal
// comes from unfamiliar tokens and phrasings rather than from which
// activity was drawn.
const std::vector<Scenario>& scenario_pool() {
  static const std::vector<Scenario> pool = {
      {1, {R"({shell} ipconfig -all > C:\Users\{user}\{docsdir}\ipcfg_{tag}.txt)"}},
      {1,
       {R"({shell} netstat -an > C:\Users\{user}\{docsdir}\net_{tag}.txt)",
        R"({sys}nbtstat.exe -a {tag})"}},
      {1, {R"({shell} dir C:\Users\{user}\{docsdir}\{project})"}},
      {1,
       {R"(C:\Program Files\Microsoft Office\Root\Office16\{office}.exe C:\Users\{user}\{docsdir}\{doc})"}},
      {1,
       {R"(C:\Program Files\{browser}\{browser}.exe https://{site}/home/{user})",
        R"(C:\Program Files\{browser}\{browser}.exe https://{site}/inbox/{user})"}},
      {1,
       {R"(C:\Program Files\{app}\{app}.exe -version)",
        R"(C:\Program Files\{app}\update.exe -check -profile {user})"}},
      {1, {R"({shell} copy C:\Users\{user}\{docsdir}\{doc} D:\backup\{tag}\{doc})"}},
      {1, {R"(powershell.exe -File C:\Scripts\{script}.ps1 -profile {user})"}},
  };
  return pool;
}

const std::vector<std::string>& shell_styles() {
  static const std::vector<std::string> v = {R"(C:\Windows\System32\cmd.exe /c)",
                                             R"(cmd.exe /c)", R"(powershell.exe)"};
  return v;
}

const std::vector<std::string>& sys_styles() {
  static const std::vector<std::string> v = {R"(C:\Windows\System32\)", R"(C:\Windows\SysWOW64\)",
                                             R"()"};
  return v;
}

const std::vector<std::string>& docsdir_styles() {
  static const std::vector<std::string> v = {"Documents", "Desktop", "Downloads"};
  return v;
}

const std::vector<std::string>& office_pool() {
  static const std::vector<std::string> v = {"winword", "excel", "powerpnt", "outlook"};
  return v;
}

const std::vector<std::string>& browser_pool() {
  static const std::vector<std::string> v = {"chrome", "msedge", "firefox"};
  return v;
}

const std::vector<std::string>& app_pool() {
  static const std::vector<std::string> v = {"7zip",   "notepad2", "vlc",      "slack",
                                             "zoom",   "gitkit",   "python39", "nodejs",
                                             "javart", "dropbox",  "onedrive", "teams"};
  return v;
}

const std::vector<std::string>& site_pool() {
  static const std::vector<std::string> v = {"www.intranet.local", "portal.corp.example",
                                             "mail.example.com",   "docs.example.org",
                                             "wiki.internal.net",  "hr.corp.example",
                                             "build.internal.net", "crm.example.org"};
  return v;
}

const std::vector<std::string>& doc_pool() {
  static std::vector<std::string> v = [] {
    std::vector<std::string> docs;
    for (int q = 1; q <= 8; ++q) docs.push_back("report_q" + std::to_string(q) + ".docx");
    for (int i = 1; i <= 30; ++i) docs.push_back("notes" + std::to_string(i) + ".txt");
    for (int y = 2015; y <= 2024; ++y) docs.push_back("budget_" + std::to_string(y) + ".xlsx");
    for (int i = 1; i <= 12; ++i) docs.push_back("plan_v" + std::to_string(i) + ".docx");
    return docs;
  }();
  return v;
}

const std::vector<std::string>& script_pool() {
  static const std::vector<std::string> v = {"cleanup", "sync_profile", "inventory", "patch_check"};
  return v;
}

const std::vector<std::string>& project_pool() {
  static const std::vector<std::string> v = {"proj_alpha", "proj_bravo", "proj_castor",
                                             "proj_delta", "proj_echo",  "proj_foxtrot",
                                             "proj_glacier", "proj_hadron", "proj_ibis",
                                             "proj_kappa"};
  return v;
}

struct HostProfile {
  std::string host_id;
  std::string tag;
  std::string shell;
  std::string sys;
  std::string docsdir;
  std::vector<std::string> users;     // primary + secondary account
  std::vector<std::string> apps;      // 3 installed apps, first is primary
  std::vector<std::string> sites;     // bookmark pair
  std::vector<std::string> docs;      // 6-document working set, earlier = hotter
  std::vector<std::string> offices;   // 2 office apps
  std::string browser;                // the host's one browser
  std::vector<std::string> scripts;   // 2 maintenance scripts
  std::vector<std::string> projects;  // 2 project folders
  // Habitual multi-activity sittings: ordered scenario sequences this
  // host runs together routinely (two pairs and one longer one).
  std::vector<std::vector<std::size_t>> workflows;
};

template <typename T>
std::vector<T> pick_subset(std::vector<T> pool, std::size_t count, Rng& rng) {
  rng.shuffle(pool);
  pool.resize(count);
  return pool;
}

HostProfile make_profile(int host_index, Rng& rng) {
  HostProfile p;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "10.0.%d.%d", host_index / 250, host_index % 250 + 2);
  p.host_id = buf;
  std::snprintf(buf, sizeof(buf), "ws%03d", host_index + 1);
  p.tag = buf;
  p.shell = shell_styles()[rng.index(shell_styles().size())];
  p.sys = sys_styles()[rng.index(sys_styles().size())];
  p.docsdir = docsdir_styles()[rng.index(docsdir_styles().size())];
  for (int u = 0; u < 2; ++u) {
    std::snprintf(buf, sizeof(buf), "user%03d", host_index * 2 + u + 1);
    p.users.push_back(buf);
  }
  p.apps = pick_subset(app_pool(), 2, rng);
  p.sites = pick_subset(site_pool(), 2, rng);
  p.docs = pick_subset(doc_pool(), 6, rng);
  p.offices = pick_subset(office_pool(), 2, rng);
  p.browser = browser_pool()[rng.index(browser_pool().size())];
  p.scripts = pick_subset(script_pool(), 2, rng);
  p.projects = pick_subset(project_pool(), 2, rng);
  auto distinct_sequence = [&](std::size_t length) {
    std::vector<std::size_t> seq;
    while (seq.size() < length) {
      const std::size_t s = rng.index(scenario_pool().size());
      if (std::find(seq.begin(), seq.end(), s) == seq.end()) seq.push_back(s);
    }
    return seq;
  };
  p.workflows.push_back(distinct_sequence(2));
  p.workflows.push_back(distinct_sequence(2));
  p.workflows.push_back(distinct_sequence(3));
  return p;
}

// Stereotyped pick with a hard frequency floor: even the coldest entry
// keeps about a tenth of the draws, so no organic slot value is
// one-of-a-kind on its host.
template <typename T>
const T& biased_pick(const std::vector<T>& pool, Rng& rng) {
  static const std::map<std::size_t, std::vector<double>> masses = {
      {2, {0.60, 0.40}},
      {3, {0.45, 0.33, 0.22}},
      {6, {0.30, 0.20, 0.14, 0.13, 0.12, 0.11}},
  };
  const auto& mass = masses.at(pool.size());
  double u = rng.uniform();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (u < mass[i]) return pool[i];
    u -= mass[i];
  }
  return pool.back();
}

// Repeated slots bind to the same value within one scenario instance: the
// copy template names the same document twice, and an app's version check
// and updater belong to the same app.
std::string instantiate(const std::string& tmpl, const HostProfile& profile, Rng& rng,
                        std::map<std::string, std::string>& bound) {
  auto resolve = [&](const std::string& slot) -> std::string {
    const auto it = bound.find(slot);
    if (it != bound.end()) return it->second;
    std::string value;
    if (slot == "shell") value = profile.shell;
    else if (slot == "sys") value = profile.sys;
    else if (slot == "docsdir") value = profile.docsdir;
    else if (slot == "user") value = rng.uniform() < 0.8 ? profile.users[0] : profile.users[1];
    else if (slot == "app") value = biased_pick(profile.apps, rng);
    else if (slot == "site") value = rng.uniform() < 0.7 ? profile.sites[0] : profile.sites[1];
    else if (slot == "doc") value = biased_pick(profile.docs, rng);
    else if (slot == "office") value = rng.uniform() < 0.65 ? profile.offices[0] : profile.offices[1];
    else if (slot == "browser") value = profile.browser;
    else if (slot == "script") value = profile.scripts[rng.index(profile.scripts.size())];
    else if (slot == "project") value = rng.uniform() < 0.6 ? profile.projects[0] : profile.projects[1];
    else if (slot == "tag") value = profile.tag;
    else throw DataError("unknown template slot '" + slot + "'");
    bound.emplace(slot, value);
    return value;
  };

  std::string out;
  out.reserve(tmpl.size() + 16);
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl[i] != '{') {
      out.push_back(tmpl[i++]);
      continue;
    }
    const std::size_t close = tmpl.find('}', i);
    out += resolve(tmpl.substr(i + 1, close - i - 1));
    i = close + 1;
  }
  return out;
}

std::size_t pick_scenario(Rng& rng) {
  const auto& pool = scenario_pool();
  int total = 0;
  for (const auto& s : pool) total += s.weight;
  int draw = rng.int_range(0, total - 1);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    draw -= pool[i].weight;
    if (draw < 0) return i;
  }
  return pool.size() - 1;
}

}  // namespace

Corpus generate_synthetic_corpus(const SynthesisConfig& spec, double delta, std::uint64_t seed) {
  if (spec.hosts < 1 || spec.tasks_per_host < 1)
    throw DataError("synthetic corpus spec requires at least one host and one task");
  if (scenario_pool().empty()) throw DataError("synthetic corpus spec has zero templates");
  const auto start = parse_rfc3339(spec.start_date);
  if (!start) throw DataError("invalid synth start_date '" + spec.start_date + "'");

  const int tasks_per_day = (spec.tasks_per_host + spec.days - 1) / spec.days;
  const double business_seconds =
      (spec.business_hour_end - spec.business_hour_start) * 3600.0;
  // Leave room for the task itself so schedules stay inside the window.
  const double gap_budget = std::max(60.0, business_seconds / tasks_per_day - 500.0);

  Corpus corpus;
  corpus.source_path = "<synthetic>";
  for (int h = 0; h < spec.hosts; ++h) {
    Rng rng(mix_seed(seed, 0x73796e74ULL, static_cast<std::uint64_t>(h)));
    const HostProfile profile = make_profile(h, rng);
    auto& records = corpus.hosts[profile.host_id];

    int day = 0;
    int tasks_today = 0;
    // Integral seconds throughout so a JSONL round trip is exact.
    auto day_start = [&](int d) {
      return *start + d * 86400.0 + spec.business_hour_start * 3600.0 +
             std::floor(rng.uniform(0, 900));
    };
    double cursor = day_start(day);
    for (int t = 0; t < spec.tasks_per_host; ++t) {
      if (tasks_today >= tasks_per_day) {
        ++day;
        tasks_today = 0;
        cursor = day_start(day);
      }

      // Most tasks are a single routine activity; the rest run one of the
      // host's habitual workflows. Workflow sittings redraw their slots,
      // so they repeat as sequences while varying as term sets.
      std::vector<std::string> commands;
      std::vector<std::size_t> parts;
      const double u = rng.uniform();
      if (u < 0.05) {
        parts = profile.workflows[2];  // the longer, rarer workflow
      } else if (u < 0.20) {
        parts = profile.workflows[rng.uniform() < 0.5 ? 0 : 1];
      } else {
        parts = {pick_scenario(rng)};
      }
      for (std::size_t part : parts) {
        std::map<std::string, std::string> bound;
        for (const char* tmpl : scenario_pool()[part].commands)
          commands.push_back(instantiate(tmpl, profile, rng, bound));
      }

      double t_cmd = cursor;
      for (std::size_t c = 0; c < commands.size(); ++c) {
        if (c > 0) t_cmd += std::floor(rng.uniform(5, 100));  // intra-task gap < delta
        records.push_back(ProcessAuditRecord{profile.host_id, t_cmd, commands[c]});
      }
      ++tasks_today;
      // Inter-task gap strictly greater than delta.
      cursor = t_cmd + delta + 60.0 + std::floor(rng.uniform(0, gap_budget));
    }
    corpus.records_kept += records.size();
  }
  return corpus;
}

}  // namespace cbott
