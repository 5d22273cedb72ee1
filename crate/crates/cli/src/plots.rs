//! Matplotlib scripts written next to the CSV tables. Run from the output directory.

macro_rules! script {
    ($body:literal) => {
        concat!(
            "import csv\nimport matplotlib.pyplot as plt\n\n\n",
            "def load(name):\n",
            "    with open(name, newline=\"\") as fh:\n",
            "        rows = list(csv.DictReader(fh))\n",
            "    out = {}\n",
            "    for key in rows[0]:\n",
            "        try:\n",
            "            out[key] = [float(r[key]) for r in rows]\n",
            "        except ValueError:\n",
            "            out[key] = [r[key] for r in rows]\n",
            "    return out\n\n\n",
            $body
        )
    };
}

pub const FIELD: &str = script!(
    r#"d = load("field_axis.csv")
h = [x * 1e3 for x in d["h"]]
fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))
ax[0].plot(h, d["Bz"])
ax[0].set(xlabel="height above pole face (mm)", ylabel="Bz (T)")
ax[1].plot(h, d["dBzdz"])
ax[1].set(xlabel="height above pole face (mm)", ylabel="dBz/dz (T/m)")
fig.tight_layout()
fig.savefig("field_axis.png", dpi=150)
"#
);

pub const SPIN: &str = script!(
    r#"d = load("spin_populations.csv")
fig, ax = plt.subplots(figsize=(5, 3.5))
for i in sorted(set(d["intensity"])):
    idx = [k for k, v in enumerate(d["intensity"]) if v == i]
    ax.plot([d["theta_deg"][k] for k in idx], [d["p_0"][k] for k in idx], label=f"I = {i:g} mW/mm$^2$")
ax.set(xlabel="angle to field (deg)", ylabel="population of $m_s=0$")
ax.legend()
fig.tight_layout()
fig.savefig("spin_populations.png", dpi=150)
"#
);

pub const PSD: &str = script!(
    r#"d = load("psd.csv")
fig, ax = plt.subplots(figsize=(5, 3.5))
ax.semilogy(d["f"], d["psd"])
ax.set(xlabel="frequency (Hz)", ylabel="PSD (m$^2$/Hz)", xlim=(0, 60))
fig.tight_layout()
fig.savefig("psd.png", dpi=150)
"#
);

pub const FIG1C: &str = script!(
    r#"d = load("fig1c.csv")
fig, ax = plt.subplots(figsize=(5, 3.5))
for key in d:
    if key.startswith("f_I"):
        ax.plot(d["theta_deg"], [f * 1e27 for f in d[key]], label=f"I = {key[3:]} mW/mm$^2$")
ax.set(xlabel="angle between NV axis and B (deg)", ylabel="force per spin (1e-27 N)")
ax.legend()
fig.tight_layout()
fig.savefig("fig1c.png", dpi=150)
"#
);

pub const FIG2: &str = script!(
    r#"tr = load("fig2_trace.csv")
fo = load("fig2_fold.csv")
ps = load("fig2_psd.csv")
fig, ax = plt.subplots(1, 3, figsize=(13, 3.5))
ax[0].plot(tr["t"], [z * 1e9 for z in tr["z_driven"]], lw=0.5, label="driven")
ax[0].plot(tr["t"], [z * 1e9 for z in tr["z_magnet_off"]], lw=0.5, label="magnet off")
ax[0].set(xlabel="time (s)", ylabel="z (nm)")
ax[0].legend()
ax[1].plot([p * 1e3 for p in fo["phase"]], [z * 1e9 for z in fo["z_mean"]])
ax[1].set(xlabel="time within period (ms)", ylabel="averaged z (nm)")
for key in ps:
    if key.startswith("psd_"):
        ax[2].semilogy(ps["f"], ps[key], lw=0.7, label=key[4:])
ax[2].set(xlabel="frequency (Hz)", ylabel="PSD (m$^2$/Hz)")
ax[2].legend()
fig.tight_layout()
fig.savefig("fig2.png", dpi=150)
"#
);

pub const FIG3: &str = script!(
    r#"d = load("fig3_force.csv")
w = load("fig3_waterfall.csv")
fig, ax = plt.subplots(1, 2, figsize=(10, 3.5))
for duty in sorted(set(d["duty"])):
    idx = [k for k, v in enumerate(d["duty"]) if v == duty]
    p = [d["power_mw"][k] for k in idx]
    ax[0].plot(p, [d["delta_f_recovered"][k] * 1e9 for k in idx], "o", label=f"D = {duty:g}")
    ax[0].plot(p, [d["delta_f_model"][k] * 1e9 for k in idx], "k-", lw=0.8)
ax[0].set(xlabel="laser power (mW)", ylabel="$\\Delta F$ (nN)")
ax[0].legend()
for n, key in enumerate(k for k in w if k.startswith("psd_")):
    ax[1].plot(w["f"], [v + n * max(w[key]) * 0.2 for v in w[key]], lw=0.7, label=key[5:] + " mW")
ax[1].set(xlabel="frequency (Hz)", ylabel="PSD, offset (m$^2$/Hz)")
fig.tight_layout()
fig.savefig("fig3.png", dpi=150)
"#
);

pub const FIG4: &str = script!(
    r#"d = load("fig4.csv")
fig, ax = plt.subplots(figsize=(5, 3.5))
for m in dict.fromkeys(d["magnet"]):
    idx = [k for k, v in enumerate(d["magnet"]) if v == m]
    ax.plot([d["gap"][k] * 1e3 for k in idx], [d["delta_f"][k] * 1e9 for k in idx], "o-", label=m)
ax.set(xlabel="gap (mm)", ylabel="$\\Delta F$ (nN)")
ax.legend()
fig.tight_layout()
fig.savefig("fig4.png", dpi=150)
"#
);

pub const SWEEP: &str = script!(
    r#"d = load("sweep.csv")
fig, ax = plt.subplots(figsize=(5, 3.5))
keys = sorted(set(zip(d["magnet"], d["power_mw"], d["duty"])))
for m, p, duty in keys:
    idx = [k for k in range(len(d["gap"])) if (d["magnet"][k], d["power_mw"][k], d["duty"][k]) == (m, p, duty)]
    ax.plot([d["gap"][k] * 1e3 for k in idx], [d["amplitude"][k] * 1e9 for k in idx], lw=0.8, label=f"{m} {p:g} mW D={duty:g}")
ax.set(xlabel="gap (mm)", ylabel="amplitude (nm)")
ax.legend(fontsize=5)
fig.tight_layout()
fig.savefig("sweep.png", dpi=150)
"#
);
