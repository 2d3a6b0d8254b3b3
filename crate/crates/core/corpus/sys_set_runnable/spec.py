# sys_set_runnable -- process lifecycle
def sys_set_runnable(old, pid):
    cond = z3.And(
        z3.And(pid > 0, pid < dt.NPROC),
        old.procs[pid].ppid == old.current,
        old.procs[pid].state ==
            dt.proc_state.PROC_EMBRYO)

    new = old.copy()
    new.procs[pid].state =
        dt.proc_state.PROC_RUNNABLE
    return cond, util.If(cond, new, old)
