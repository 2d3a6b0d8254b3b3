# sys_alloc_page -- process resources
def sys_alloc_page(old, pid, pn):
    cond = z3.And(
        is_pid_valid(pid),
        z3.Or(pid == old.current, old.procs[pid].ppid == old.current),
        z3.ULT(pn, dt.NPAGE),
        old.pages[pn].type == dt.page_type.PAGE_TYPE_FREE,
    )
    new = old.copy()
    new.pages[pn].type = dt.page_type.PAGE_TYPE_FRAME
    new.pages[pn].owner = pid
    new.pages[pn].refcnt = 1
    new.procs[pid].nr_pages += 1
    return cond, util.If(cond, new, old)
