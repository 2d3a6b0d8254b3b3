# sys_reclaim_page -- page reclamation
def sys_reclaim_page(old, pn):
    owner = old.pages[pn].owner
    cond = z3.And(
        z3.ULT(pn, dt.NPAGE),
        old.pages[pn].type == dt.page_type.PAGE_TYPE_FRAME,
        is_pid_valid(owner),
        old.procs[owner].state == dt.proc_state.PROC_ZOMBIE,
        old.pages[pn].refcnt == 1,
    )
    new = old.copy()
    new.procs[owner].nr_pages -= 1
    new.pages[pn].type = dt.page_type.PAGE_TYPE_FREE
    new.pages[pn].owner = 0
    new.pages[pn].refcnt = 0
    return cond, util.If(cond, new, old)
