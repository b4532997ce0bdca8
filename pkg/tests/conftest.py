ACCEPTANCE_TITLES = {
    1: "two-qubit steering example is Steerable with a checked witness",
    2: "constructed measurement pairs steer 100/100 random pure states",
    3: "separable and single-setting assemblages are Unsteerable",
    4: "noisy CHSH transition matches the exact LP oracle",
    5: "no Bell-nonlocal state is unsteerable in both directions",
    6: "verdicts and distances are invariant under local unitaries",
    7: "mixtures of Local / Unsteerable instances stay Local / Unsteerable",
    8: "Fourier bases are disjoint and unitary",
}

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in ACCEPTANCE_TITLES.items():
        if n in ACCEPTANCE_RESULTS:
            ok, detail = ACCEPTANCE_RESULTS[n]
            status = "PASS" if ok else "FAIL"
        else:
            status, detail = "FAIL", "not run or errored"
        terminalreporter.write_line(f"criterion {n}: {status}  {title} ({detail})")
