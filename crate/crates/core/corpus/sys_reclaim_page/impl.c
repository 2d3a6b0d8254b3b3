/* sys_reclaim_page -- page reclamation */
int sys_reclaim_page(pn_t pn)
{
    struct page *page;
    struct proc *owner;

    if (!is_pn_valid(pn))
        return -EINVAL;
    page = get_page(pn);
    if (page->type != PAGE_TYPE_FRAME)
        return -EINVAL;
    if (!is_pid_valid(page->owner))
        return -ESRCH;
    owner = get_proc(page->owner);
    if (owner->state != PROC_ZOMBIE)
        return -EBUSY;
    if (page->refcnt != 1)
        return -EBUSY;
    owner->nr_pages -= 1;
    page->type = PAGE_TYPE_FREE;
    page->owner = 0;
    page->refcnt -= 1;
    return 0;
}
